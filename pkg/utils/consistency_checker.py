"""
Numeric consistency checker for named arrays.
Useful for debugging tied-weight, gradient and checkpoint mismatches.
"""

from typing import Dict, Hashable, List, Tuple

import numpy as np


def find_violations(
    expected: Dict[Hashable, np.ndarray],
    actual: Dict[Hashable, np.ndarray],
    atol: float = 1e-6,
    rtol: float = 1e-6,
    max_lines: int = 50,
    verbose: bool = True,
) -> List[Tuple]:
    """
    Compare two name -> array maps element-wise.

    Parameters
    ----------
    expected : dict
        Reference values, e.g. summed per-site gradients of a copied model
    actual : dict
        Values under test, keyed like ``expected``
    atol : float
        Absolute tolerance for violations
    rtol : float
        Relative tolerance (as fraction of the expected value)
    max_lines : int
        Maximum violations to print
    verbose : bool
        Print the report

    Returns
    -------
    List[Tuple]
        List of violations, each tuple contains:
        (type, name, index, actual, relation, expected, gap)

    Notes
    -----
    A violation occurs when:
        |actual - expected| > atol + rtol * |expected|
    Keys present on one side only are reported as type "K", shape
    disagreements as type "S" and non-finite values as type "NaN".

    Examples
    --------
    >>> violations = find_violations(folded_grads, shared_grads, atol=0, rtol=1e-10)
    >>> assert not violations
    """
    violations = []

    # Check key sets
    for name in expected:
        if name not in actual:
            violations.append(("K", str(name), (), np.nan, "missing", np.nan, np.inf))
    for name in actual:
        if name not in expected:
            violations.append(("K", str(name), (), np.nan, "unexpected", np.nan, np.inf))

    # Check values
    for name, ref in expected.items():
        if name not in actual:
            continue
        ref = np.asarray(ref, dtype=np.float64)
        got = np.asarray(actual[name], dtype=np.float64)
        if ref.shape != got.shape:
            violations.append(("S", str(name), (), float(got.size), "shape", float(ref.size), np.inf))
            continue

        bad = ~np.isfinite(got) & np.isfinite(ref)
        for idx in zip(*np.nonzero(bad)):
            violations.append(("NaN", str(name), tuple(int(i) for i in idx), float(got[idx]), "=", float(ref[idx]), np.inf))

        gap = np.abs(got - ref)
        over = np.isfinite(gap) & (gap > atol + rtol * np.abs(ref))
        for idx in zip(*np.nonzero(over)):
            violations.append(("V", str(name), tuple(int(i) for i in idx), float(got[idx]), "=", float(ref[idx]), float(gap[idx])))

    # Sort by gap size (largest first)
    violations.sort(key=lambda rec: -rec[-1])

    # Print results
    if verbose:
        if not violations:
            print("No violations above tolerance.")
        else:
            print(
                f"{len(violations)} violations "
                f"(showing up to {max_lines}):"
            )
            for k, n, idx, got, s, ref, g in violations[:max_lines]:
                idx_str = "" if idx == () else str(idx)
                print(
                    f" {k:<3} {n}{idx_str:<20} : "
                    f"{got: .6g}  {s}  {ref: .6g}   (gap = {g: .3g})"
                )

    return violations


def relative_error(a, b) -> float:
    """max |a - b| / max(|a|, |b|, tiny), the gradient-check metric."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale)
