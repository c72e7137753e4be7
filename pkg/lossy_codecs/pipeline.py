import logging

from rd_core.exceptions import ParamMismatch, RoundtripMismatch
from rd_core.models import SourceModel, DistortionSpec
from source_sim.models import SymbolBlock

from .bitstream import Bitstream
from .container import Container
from .gvw import gvw_encode, gvw_decode
from .hyb import hyb_encode, hyb_decode
from .llz import llz_encode, llz_decode
from .models import GvwParams, HybParams, LlzParams, EncodeReport, GVW, LLZ, HYB, MICRO

logger = logging.getLogger(__name__)

CODECS = (GVW, LLZ, HYB)


def build_params(codec: str, source: SourceModel, dist: DistortionSpec, n: int, ell: int,
                 gamma: float, D: float, seed: int, alpha: float | None = None,
                 max_ell_rate: float | None = None):
    if codec == GVW:
        return GvwParams.build(source, dist, n, ell, gamma, D, seed, max_ell_rate)
    if codec == HYB:
        return HybParams.build(source, dist, n, ell, gamma, D, seed, max_ell_rate)
    if codec == LLZ:
        if alpha is None:
            raise ParamMismatch("LLZ needs alpha")
        return LlzParams.build(source, dist, n, ell, gamma, D, alpha, seed, max_ell_rate)
    raise ParamMismatch(f"unknown codec '{codec}', expected one of {', '.join(CODECS)}")


def encode(params, x: SymbolBlock, source: SourceModel, dist: DistortionSpec,
           workers: int | None = None, memory_cap: int | None = None) -> tuple[Bitstream, EncodeReport]:
    encoder = {GVW: gvw_encode, LLZ: llz_encode, HYB: hyb_encode}[params.codec]
    return encoder(x, params, source, dist, workers=workers, memory_cap=memory_cap)


def decode(params, stream: Bitstream, dist: DistortionSpec, checksum: int | None = None,
           memory_cap: int | None = None) -> SymbolBlock:
    if params.codec == GVW:
        return gvw_decode(stream, params, dist, checksum=checksum, memory_cap=memory_cap)
    if params.codec == HYB:
        return hyb_decode(stream, params, dist, checksum=checksum, memory_cap=memory_cap)
    return llz_decode(stream, params, dist, params.n, checksum=checksum, memory_cap=memory_cap)


def verify_roundtrip(params, stream: Bitstream, report: EncodeReport, dist: DistortionSpec,
                     memory_cap: int | None = None) -> SymbolBlock:
    decoded = decode(params, stream, dist, checksum=report.database_checksum, memory_cap=memory_cap)
    if decoded != report.reconstruction:
        raise RoundtripMismatch(f"{params.codec} decoder output differs from the encoder's reconstruction")
    return decoded


def params_from_container(c: Container, seed: int | None = None, max_ell_rate: float | None = None):
    """Rebuild the encoder's params from a header; `seed` overrides the stored one."""
    return build_params(
        c.codec, c.source, c.dist, c.n, c.ell,
        gamma=c.gamma_micro / MICRO, D=c.d_micro / MICRO,
        seed=c.seed if seed is None else seed,
        alpha=c.alpha_micro / MICRO if c.codec == LLZ else None,
        max_ell_rate=max_ell_rate,
    )
