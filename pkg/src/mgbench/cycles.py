"""Linear baseline cycles: the \\-cycle (pre-smoothing only) and the V-cycle.

Both approximate A_k^{-1} f with a zero initial guess inside the call;
restriction is the prolongator transpose and the coarsest level is solved
exactly.  The V-cycle post-smooths with R^t, making it self-adjoint.
"""

LINEAR_CYCLE_KINDS = ("backslash", "v_cycle")


def _check_level(h, k, f):
    lv = h.level(k)
    if f.shape[0] != lv.A.shape[0]:
        raise ValueError("dimension mismatch at level %d: matrix is %d, "
                         "vector has length %d" % (k, lv.A.shape[0], f.shape[0]))
    return lv


def apply_backslash(h, k, f):
    """One \\-cycle at level k: pre-smooth, recurse, no post-smoothing."""
    lv = _check_level(h, k, f)
    if k == 1:
        return h.coarsest_solver.solve(f)
    u1 = lv.smoother.apply(f)
    P = h.level(k - 1).P_to_finer
    coarse = apply_backslash(h, k - 1, P.T @ (f - lv.A @ u1))
    return u1 + P @ coarse


def apply_v_cycle(h, k, f):
    """One V-cycle at level k: pre-smooth, recurse, post-smooth with R^t."""
    lv = _check_level(h, k, f)
    if k == 1:
        return h.coarsest_solver.solve(f)
    u1 = lv.smoother.apply(f)
    P = h.level(k - 1).P_to_finer
    u2 = u1 + P @ apply_v_cycle(h, k - 1, P.T @ (f - lv.A @ u1))
    return u2 + lv.smoother.apply_transpose(f - lv.A @ u2)
