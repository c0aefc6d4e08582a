from __future__ import annotations

from ..dsp import ComplexSpectrogram
from ..errors import ContractError, DimensionError
from ..numerics import Tensor, as_tensor, mean, sqrt, square

MAG_EPS = 1e-12


def _magnitude(real: Tensor, imag: Tensor) -> Tensor:
    return sqrt(square(real) + square(imag) + MAG_EPS)


def loss_full(est: ComplexSpectrogram, target: ComplexSpectrogram, mu: float = 0.5) -> Tensor:
    """``mu * L_RI + (1 - mu) * L_Mag``, both averaged over bins."""
    if est.compressed != target.compressed:
        raise ContractError(
            f"estimate compressed={est.compressed} but target compressed={target.compressed}"
        )
    if est.shape != target.shape:
        raise DimensionError(f"estimate {est.shape} and target {target.shape} differ")
    er, ei = as_tensor(est.real), as_tensor(est.imag)
    tr, ti = as_tensor(target.real), as_tensor(target.imag)
    l_ri = mean(square(er - tr) + square(ei - ti))
    l_mag = mean(square(_magnitude(er, ei) - _magnitude(tr, ti)))
    return l_ri * mu + l_mag * (1.0 - mu)
