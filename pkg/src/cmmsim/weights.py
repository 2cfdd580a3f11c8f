"""Fusion weight policies and consensus analysis.

Every policy yields a row-stochastic matrix supported on the connection
structure (boolean N x N, diagonal true, row i listing the sources node i
receives from). Support may be directed; degree-based rules then use
in-degrees, which is the information a node actually has.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


def _check_support(connection) -> np.ndarray:
    connection = np.asarray(connection, dtype=bool)
    if connection.ndim != 2 or connection.shape[0] != connection.shape[1]:
        raise ValueError("connection must be square")
    if not connection.diagonal().all():
        raise ValueError("connection diagonal must be true")
    return connection


def identity_weights(n: int) -> np.ndarray:
    return np.eye(n)


def max_degree_weights(connection) -> np.ndarray:
    """Neighbor weight 1/max(d_i, d_j) from local degrees, remainder on
    the diagonal. Guaranteed row-stochastic: max(d_i, d_j) >= d_i makes
    each off-diagonal row sum at most 1."""
    connection = _check_support(connection)
    n = connection.shape[0]
    deg = connection.sum(axis=1) - 1
    a = np.zeros((n, n))
    for i in range(n):
        for j in np.nonzero(connection[i])[0]:
            if j != i:
                a[i, j] = 1.0 / max(deg[i], deg[j])
        a[i, i] = 1.0 - a[i].sum()
    return a


def constant_alpha_weights(connection, alpha: float) -> np.ndarray:
    """Diagonal alpha, 1 - alpha split equally over the non-self sources.
    A row with no non-self source keeps weight 1 regardless of alpha."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    connection = _check_support(connection)
    n = connection.shape[0]
    a = np.zeros((n, n))
    for i in range(n):
        others = [j for j in np.nonzero(connection[i])[0] if j != i]
        if not others:
            a[i, i] = 1.0
            continue
        a[i, others] = (1.0 - alpha) / len(others)
        a[i, i] = alpha
    return a


def random_weights(connection, seed) -> np.ndarray:
    """Uniform(0,1) draws over each row's support, normalized to sum 1."""
    connection = _check_support(connection)
    rng = np.random.default_rng(seed)
    draws = rng.random(connection.shape) * connection
    return draws / draws.sum(axis=1, keepdims=True)


def variance_min_weights(
    estimates,
    connection,
    floor: float = 0.05,
    max_iter: int = 5000,
    tol: float = 1e-10,
    distributed_rounds: int | None = None,
) -> np.ndarray:
    """Weights minimizing the post-fusion spread of the estimates.

    Projected gradient descent on the mean squared deviation of A x from
    its network mean, over row simplices supported on the connection
    structure with a self-weight floor. Initialized at the max-degree
    rule, so the result never does worse than it. Deterministic.

    distributed_rounds switches to the per-node variant where the network
    mean is not read off globally but estimated with that many consensus
    averaging rounds per descent step; None solves centrally.
    """
    connection = _check_support(connection)
    x = np.asarray(estimates, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if not np.isfinite(x).all():
        raise ValueError("estimates must be finite")
    if x.shape[0] != connection.shape[0]:
        raise ValueError("estimates and connection disagree on node count")
    if not 0.0 <= floor < 1.0:
        raise ValueError("floor must lie in [0, 1)")
    a0 = kernels.project_rows_to_weights(max_degree_weights(connection), connection, floor)
    if distributed_rounds is None:
        a, _, _ = kernels.minimize_output_spread(x, connection, floor, a0, max_iter, tol)
        return a
    return _variance_min_distributed(x, connection, floor, a0, max_iter, tol, distributed_rounds)


def _variance_min_distributed(x, support, floor, a0, max_iter, tol, rounds):
    """Per-node projected gradient with consensus-estimated means.

    Each node holds one row of A and sees only its sources' estimates. The
    two global quantities the central solver reads directly are replaced
    by local primitives over the (symmetrized) network: the mean output by
    `rounds` rounds of max-degree averaging, and the gradient step scale
    by max-consensus of the squared estimate norms, which is exact once
    `rounds` reaches the network diameter. The resulting per-node step
    1/(2 max_j ||x_j||^2) never exceeds the central solver's safe step, so
    descent stays monotone; it is smaller, so more iterations are needed
    for the same tolerance.
    """
    n = x.shape[0]
    sym = support | support.T
    # Damped averaging: plain max-degree weights are periodic on regular
    # bipartite graphs (zero diagonal everywhere), where the alternating
    # mode never decays. Halving toward self keeps the matrix doubly
    # stochastic and local while forcing aperiodicity.
    w = 0.5 * (np.eye(n) + max_degree_weights(sym))

    def mean_estimate(values):
        for _ in range(rounds):
            values = w @ values
        return values

    # lambda_max(X^T X) <= trace <= n max_j ||x_j||^2, so 1/(2 max ||x||^2)
    # never exceeds the central step n/(2 lambda_max).
    sqnorm = np.einsum("ij,ij->i", x, x)
    for _ in range(rounds):
        sqnorm = np.where(sym, sqnorm[None, :], -np.inf).max(axis=1)
    with np.errstate(divide="ignore"):
        steps = np.where(sqnorm > 0.0, 1.0 / (2.0 * sqnorm), 0.0)
    a = a0.copy()
    prev = np.inf
    for _ in range(max_iter):
        y = a @ x
        dev = y - mean_estimate(y)
        obj = float(np.einsum("ij,ij->", dev, dev)) / n
        if prev - obj < tol:
            break
        prev = obj
        grad = (2.0 / n) * (dev @ x.T)
        a = kernels.project_rows_to_weights(a - steps[:, None] * grad, support, floor)
    return a


def asymptotic_convergence_rate(a) -> float:
    """Worst-case geometric decay factor of deviation from consensus.

    The modulus of the second largest eigenvalue: the unit eigenvalue
    carrying the fixed point is removed, the largest remaining modulus is
    the rate. Disconnected support leaves a second unit eigenvalue, so the
    rate comes out 1 with no special casing. Dust below 1e-12 is snapped
    to 0 and values within 1e-9 of 1 to exactly 1.
    """
    a = np.asarray(a, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.shape[0] == 1:
        return 0.0
    eig = np.linalg.eigvals(a)
    drop = int(np.argmin(np.abs(eig - 1.0)))
    rate = float(np.abs(np.delete(eig, drop)).max())
    if rate < 1e-12:
        return 0.0
    if abs(rate - 1.0) < 1e-9:
        return 1.0
    return rate


@dataclass(frozen=True)
class Policy:
    """Parsed weight policy selector."""

    kind: str
    alpha: float | None = None
    seed: int | None = None

    @property
    def per_step(self) -> bool:
        """Whether the matrix changes from one timestep to the next.

        variance_min re-solves because it depends on the current estimates;
        random redraws so results reflect the policy, not one lucky or
        unlucky matrix. Redrawing does not rescue a node whose neighborhood
        lacks information: no draw can weight particles that do not exist.
        """
        return self.kind in ("variance_min", "random")

    def __str__(self):
        if self.kind == "constant_alpha":
            return f"constant:{self.alpha:g}"
        if self.kind == "random":
            return f"random:{self.seed}"
        return self.kind


def parse_policy(text: str) -> Policy:
    """Parse a policy selector:
    variance_min | max_degree | constant:<alpha> | random:<seed> | identity.
    """
    kind, _, arg = text.partition(":")
    if kind in ("variance_min", "max_degree", "identity"):
        if arg:
            raise ValueError(f"policy {kind} takes no argument")
        return Policy(kind)
    if kind == "constant":
        alpha = float(arg)
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        return Policy("constant_alpha", alpha=alpha)
    if kind == "random":
        return Policy("random", seed=int(arg))
    raise ValueError(f"unknown policy {text!r}")
