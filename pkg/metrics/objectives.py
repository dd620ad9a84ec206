"""
Separation objectives: SI-SNR, simplified SDR, their improvements over the
unprocessed mixture, and the permutation-invariant training loss.

Both metrics mean-center their inputs and clamp to +/-100 dB. The same
formula backs the float64 evaluators and the differentiable loss.
"""

from dataclasses import dataclass
from itertools import permutations
from typing import List, Tuple

import numpy as np

from numeric import Tensor
from numeric import functional as F

CLAMP_DB = 100.0
# keeps log10 finite when a projection or error term vanishes
_TINY = 1e-30


@dataclass
class EvalResult:
    si_snr: List[float]
    si_snri: float
    sdr: List[float]
    sdri: float
    permutation: Tuple[int, ...]
    utterance_id: str = ""
    scheme: str = ""

    def to_row(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "scheme": self.scheme,
            "si_snr": float(np.mean(self.si_snr)),
            "si_snri": self.si_snri,
            "sdr": float(np.mean(self.sdr)),
            "sdri": self.sdri,
            "permutation": "-".join(str(p) for p in self.permutation),
        }


def _check_pair(estimate: np.ndarray, reference: np.ndarray):
    estimate = np.asarray(estimate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if estimate.shape != reference.shape or estimate.ndim != 1:
        raise ValueError(f"Estimate {estimate.shape} and reference {reference.shape} must be equal-length 1-D signals.")
    if estimate.size < 1:
        raise ValueError("Signals must contain at least one sample.")
    estimate = estimate - estimate.mean()
    reference = reference - reference.mean()
    if not np.any(reference):
        raise ValueError("Reference is all-zero after mean-centering; SI-SNR is undefined.")
    return estimate, reference


def _ratio_db(num: float, den: float) -> float:
    value = 10.0 * np.log10((num + _TINY) / (den + _TINY))
    return float(np.clip(value, -CLAMP_DB, CLAMP_DB))


def si_snr(estimate, reference) -> float:
    """Scale-invariant SNR in dB (clamped to +/-100)."""
    est, ref = _check_pair(estimate, reference)
    target = (np.dot(est, ref) / np.dot(ref, ref)) * ref
    error = est - target
    return _ratio_db(np.dot(target, target), np.dot(error, error))


def sdr(estimate, reference) -> float:
    """Plain signal-to-error ratio in dB on centered signals (not the BSS-Eval projection)."""
    est, ref = _check_pair(estimate, reference)
    error = ref - est
    return _ratio_db(np.dot(ref, ref), np.dot(error, error))


def _pair_matrix(metric, estimates: np.ndarray, references: np.ndarray) -> np.ndarray:
    c = references.shape[0]
    return np.array([[metric(estimates[i], references[j]) for j in range(c)] for i in range(c)])


def best_permutation(score: np.ndarray) -> Tuple[Tuple[int, ...], float]:
    """Permutation pi maximizing mean_c score[pi(c), c]; ties keep the lexicographically smallest."""
    c = score.shape[0]
    best_perm, best_value = None, -np.inf
    for perm in permutations(range(c)):
        value = float(np.mean([score[perm[j], j] for j in range(c)]))
        if value > best_value:
            best_perm, best_value = perm, value
    return best_perm, best_value


def _check_sources(estimates, references):
    estimates = np.asarray(estimates, dtype=np.float64)
    references = np.asarray(references, dtype=np.float64)
    if estimates.ndim != 2 or estimates.shape != references.shape:
        raise ValueError(f"Estimates {estimates.shape} and references {references.shape} must both be [C, T].")
    return estimates, references


def si_snri(mixture, estimates, references) -> float:
    """Mean SI-SNR of PIT-matched estimates minus that of the mixture used as every estimate."""
    estimates, references = _check_sources(estimates, references)
    perm, value = best_permutation(_pair_matrix(si_snr, estimates, references))
    base = np.mean([si_snr(mixture, ref) for ref in references])
    return float(value - base)


def sdri(mixture, estimates, references) -> float:
    """SDR improvement under the SI-SNR PIT-optimal permutation."""
    estimates, references = _check_sources(estimates, references)
    perm, _ = best_permutation(_pair_matrix(si_snr, estimates, references))
    value = np.mean([sdr(estimates[perm[j]], references[j]) for j in range(references.shape[0])])
    base = np.mean([sdr(mixture, ref) for ref in references])
    return float(value - base)


def evaluate(mixture, estimates, references, utterance_id: str = "", scheme: str = "") -> EvalResult:
    """Full metric set of one separated utterance; all signals trimmed to the estimate length."""
    estimates = np.asarray(estimates, dtype=np.float64)
    length = estimates.shape[1]
    mixture = np.asarray(mixture, dtype=np.float64)[:length]
    references = np.asarray(references, dtype=np.float64)[:, :length]
    estimates, references = _check_sources(estimates, references)

    perm, value = best_permutation(_pair_matrix(si_snr, estimates, references))
    c = references.shape[0]
    si = [si_snr(estimates[perm[j]], references[j]) for j in range(c)]
    sd = [sdr(estimates[perm[j]], references[j]) for j in range(c)]
    mix_si = np.mean([si_snr(mixture, ref) for ref in references])
    mix_sd = np.mean([sdr(mixture, ref) for ref in references])
    return EvalResult(
        si_snr=si,
        si_snri=float(np.mean(si) - mix_si),
        sdr=sd,
        sdri=float(np.mean(sd) - mix_sd),
        permutation=tuple(perm),
        utterance_id=utterance_id,
        scheme=scheme,
    )


# =================================================================
#  DIFFERENTIABLE LOSS
# =================================================================
def si_snr_tensor(estimate: Tensor, reference: Tensor) -> Tensor:
    """Differentiable SI-SNR of two [T] tensors (same formula and clamp as ``si_snr``)."""
    est = F.sub(estimate, F.mean(estimate))
    ref = F.sub(reference, F.mean(reference))
    scale = F.div(F.dot(est, ref), F.dot(ref, ref))
    target = F.mul(ref, scale)
    error = F.sub(est, target)
    ratio = F.div(F.add(F.dot(target, target), _TINY), F.add(F.dot(error, error), _TINY))
    return F.clamp(F.mul(F.log10(ratio), 10.0), -CLAMP_DB, CLAMP_DB)


def pit_loss(estimates: Tensor, references) -> Tuple[Tensor, Tuple[int, ...]]:
    """Negative mean SI-SNR under the best source assignment.

    ``estimates`` and ``references`` are [C, T]; the loss is differentiable
    through the selected permutation only.
    """
    if not isinstance(references, Tensor):
        references = Tensor(np.asarray(references), dtype=estimates.dtype)
    if estimates.ndim != 2 or estimates.shape != references.shape:
        raise ValueError(f"Estimates {estimates.shape} and references {references.shape} must both be [C, T].")
    c = estimates.shape[0]
    if c > 4:
        raise ValueError(f"pit_loss enumerates permutations exhaustively; C={c} exceeds 4.")
    if not np.all(np.any(references.data - references.data.mean(axis=1, keepdims=True) != 0, axis=1)):
        raise ValueError("A reference is all-zero after mean-centering; SI-SNR is undefined.")

    pair = [[si_snr_tensor(estimates[i], references[j]) for j in range(c)] for i in range(c)]
    score = np.array([[pair[i][j].item() for j in range(c)] for i in range(c)])
    perm, _ = best_permutation(score)

    total = pair[perm[0]][0]
    for j in range(1, c):
        total = F.add(total, pair[perm[j]][j])
    return F.mul(total, -1.0 / c), perm


def pit_loss_value(estimates: np.ndarray, references: np.ndarray) -> Tuple[float, Tuple[int, ...]]:
    """Float64 evaluator of ``pit_loss`` (no tape)."""
    estimates, references = _check_sources(estimates, references)
    perm, value = best_permutation(_pair_matrix(si_snr, estimates, references))
    return -value, perm

