"""Dense statevector simulation and classical optimization of Max-Cut QAOA.

Circuit: uniform superposition, then for each layer l the diagonal cost phase
exp(-i*gamma_l*C) followed by the mixer exp(-i*beta_l*X) on every qubit. The
expectation of C under the final state is maximized over the 2p angles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graphs import Graph
from .maxcut import DEFAULT_CAP, _all_cut_values, assignment_bits, brute_force_maxcut

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QaoaParams:
    """Depth-p angle vectors. Canonical form: gamma in [-pi, pi), beta in [-pi/2, pi/2)."""

    gamma: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(x) for x in self.gamma))
        object.__setattr__(self, "beta", tuple(float(x) for x in self.beta))
        if len(self.gamma) != len(self.beta) or not self.gamma:
            raise ValueError(f"need matching nonempty angle vectors, got {len(self.gamma)} gammas, {len(self.beta)} betas")

    @property
    def p(self) -> int:
        return len(self.gamma)

    def flat(self) -> np.ndarray:
        return np.array(self.gamma + self.beta, dtype=np.float64)

    @staticmethod
    def from_flat(x: np.ndarray) -> "QaoaParams":
        p = len(x) // 2
        return QaoaParams(tuple(x[:p]), tuple(x[p:]))


@dataclass
class StateVector:
    amplitudes: np.ndarray
    n: int

    def norm_sq(self) -> float:
        return float(np.sum(self.amplitudes.real ** 2 + self.amplitudes.imag ** 2))

    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real ** 2 + self.amplitudes.imag ** 2


@dataclass
class OptimizationTrace:
    expectations: list[float]
    ar_init: float
    ar_final: float
    iterations: int


def wrap_angle(x: float, period: float) -> float:
    """Wrap x into [-period/2, period/2)."""
    half = period / 2.0
    return (x + half) % period - half


def wrap_canonical(params: QaoaParams) -> QaoaParams:
    """gamma into [-pi, pi), beta into [-pi/2, pi/2).

    The beta wrap is an exact symmetry of the expectation for any weights
    (X-rotation layers have period pi up to global phase); the gamma wrap is
    exact for integer-weight graphs, where the cost spectrum is integral.
    """
    return QaoaParams(
        tuple(wrap_angle(g, TWO_PI) for g in params.gamma),
        tuple(wrap_angle(b, math.pi) for b in params.beta),
    )


def fold_params(g: Graph, params: QaoaParams) -> QaoaParams:
    """Canonical representative of the parameters' expectation-equivalence class.

    Angle sets related by an exact symmetry of the cost expectation score
    identically, so regression labels scattered across mirror copies carry no
    extra information and only frustrate a mean-squared fit. Only moves that
    are exact for the given graph are applied:

    - shifting any mixer angle by pi/2 inserts a global bit flip, and cut
      values are complement-invariant, so each beta folds into [-pi/4, pi/4)
      for any edge weights;
    - on unit-weight graphs whose degrees all share one parity, shifting a
      phase angle by pi inserts Z on every odd-degree vertex; each gamma folds
      into [-pi/2, pi/2), and when degrees are odd each pi-shift at layer k
      also negates the mixer angles from layer k on;
    - with integer (but not all-unit) weights the cost spectrum is integral,
      so each gamma folds by its 2*pi period instead; non-integer weights
      leave gamma untouched;
    - conjugating the whole circuit negates every angle at once, pinning the
      first nonzero gamma nonnegative.

    Unlike the canonical wrap, which trades exactness for a fixed box on
    non-integer weights, every move here preserves the expectation to float
    roundoff, so the fold never changes a record's measured ratio.
    """
    gamma = list(params.gamma)
    beta = [wrap_angle(b, math.pi / 2) for b in params.beta]
    weights = [w for _, _, w in g.edges]
    parities = {int(d) % 2 for d in g.degrees()}
    integral = all(float(w).is_integer() for w in weights)
    if all(w == 1.0 for w in weights) and len(parities) <= 1:
        odd = parities == {1}
        for k in range(params.p):
            folded = wrap_angle(gamma[k], math.pi)
            shifts = round((gamma[k] - folded) / math.pi)
            gamma[k] = folded
            if odd and shifts % 2 != 0:
                for j in range(k, params.p):
                    beta[j] = -beta[j]
    elif integral:
        gamma = [wrap_angle(x, TWO_PI) for x in gamma]
    pivot = next((x for x in gamma if x != 0.0), 0.0)
    if pivot < 0.0:
        negated = [-x for x in gamma]
        if integral:
            negated = [wrap_angle(x, TWO_PI) for x in negated]
        # without an exact gamma period, negating -pi would leave the wrap
        # range for good; keep the original signs in that corner
        if all(x < math.pi for x in negated):
            gamma = negated
            beta = [-x for x in beta]
    return QaoaParams(tuple(gamma), tuple(beta))


def cost_vector(g: Graph, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Entry z holds the cut value of the bit pattern of z (vertex 0 = MSB)."""
    if g.n > cap:
        raise ValueError(f"instance too large: n={g.n} exceeds cap {cap}")
    return _all_cut_values(g, 1 << g.n)


def uniform_state(n: int) -> StateVector:
    dim = 1 << n
    amps = np.full(dim, dim ** -0.5, dtype=np.complex128)
    return StateVector(amps, n)


def apply_phase_layer(s: StateVector, costs: np.ndarray, gamma: float) -> StateVector:
    """amp_z *= exp(-i*gamma*costs_z); mutates s in place and returns it."""
    if len(costs) != len(s.amplitudes):
        raise ValueError(f"cost vector length {len(costs)} != state dimension {len(s.amplitudes)}")
    _kernels.phase_inplace(s.amplitudes, costs, float(gamma))
    return s


def apply_mixer_layer(s: StateVector, beta: float) -> StateVector:
    """exp(-i*beta*X) on every qubit; mutates s in place and returns it."""
    _kernels.mixer_inplace(s.amplitudes, s.n, float(beta))
    return s


def qaoa_state(g: Graph, params: QaoaParams, costs: np.ndarray | None = None) -> StateVector:
    if costs is None:
        costs = cost_vector(g)
    s = uniform_state(g.n)
    for gamma, beta in zip(params.gamma, params.beta):
        apply_phase_layer(s, costs, gamma)
        apply_mixer_layer(s, beta)
    return s


def expectation(s: StateVector, costs: np.ndarray) -> float:
    if len(costs) != len(s.amplitudes):
        raise ValueError(f"cost vector length {len(costs)} != state dimension {len(s.amplitudes)}")
    return float(_kernels.expectation_value(s.amplitudes, costs))


def most_likely_cut(s: StateVector) -> tuple[int, ...]:
    """Bits of the highest-probability basis state; exact ties pick the smallest index."""
    return assignment_bits(int(np.argmax(s.probabilities())), s.n)


def random_init(p: int, rng: np.random.Generator) -> QaoaParams:
    """gamma ~ U[-pi, pi), beta ~ U[-pi/2, pi/2), layer by layer."""
    gammas = rng.uniform(-math.pi, math.pi, size=p)
    betas = rng.uniform(-math.pi / 2, math.pi / 2, size=p)
    return QaoaParams(tuple(gammas), tuple(betas))


def _ratio(value: float, cmax: float) -> float:
    return 1.0 if cmax == 0.0 else value / cmax


def approximation_ratio(g: Graph, params: QaoaParams) -> float:
    """Expectation divided by the exact max cut; defined as 1.0 for edgeless graphs."""
    costs = cost_vector(g)
    value = expectation(qaoa_state(g, params, costs), costs)
    return _ratio(value, brute_force_maxcut(g).value)


def optimize_params(
    g: Graph,
    init: QaoaParams,
    budget: int,
    lr: float = 0.05,
    fd_step: float = 1e-3,
) -> tuple[QaoaParams, OptimizationTrace]:
    """Maximize the cost expectation by Adam ascent with central finite differences.

    The init is canonicalized first, so all evaluated points live in wrapped
    coordinates. The trace records one expectation per iteration, evaluated
    before that iteration's update. The returned parameters are the best point
    seen across all budget+1 evaluated iterates, not the last one, wrapped to
    canonical form. Exact all-zero finite-difference gradients (the wrapped
    origin is a stationary point on every graph) are escaped by a fixed
    deterministic nudge of fd_step per angle instead of an Adam step.
    Deterministic for fixed inputs.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    costs = cost_vector(g)
    cmax = brute_force_maxcut(g).value

    def f(x: np.ndarray) -> float:
        return expectation(qaoa_state(g, QaoaParams.from_flat(x), costs), costs)

    x = wrap_canonical(init).flat()
    dim = len(x)
    m = np.zeros(dim)
    v = np.zeros(dim)
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    expectations: list[float] = []
    best_x = x.copy()
    best_f = f(x)
    ar_init = _ratio(best_f, cmax)

    for t in range(1, budget + 1):
        fx = f(x)
        expectations.append(fx)
        if fx > best_f:
            best_f = fx
            best_x = x.copy()
        grad = np.zeros(dim)
        for i in range(dim):
            xp = x.copy()
            xm = x.copy()
            xp[i] += fd_step
            xm[i] -= fd_step
            grad[i] = (f(xp) - f(xm)) / (2.0 * fd_step)
        if not grad.any():
            x = x + fd_step
            continue
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        x = x + lr * m_hat / (np.sqrt(v_hat) + eps)

    fx = f(x)
    if fx > best_f:
        best_f = fx
        best_x = x.copy()

    best = wrap_canonical(QaoaParams.from_flat(best_x))
    final_f = expectation(qaoa_state(g, best, costs), costs)
    trace = OptimizationTrace(
        expectations=expectations,
        ar_init=ar_init,
        ar_final=_ratio(final_f, cmax),
        iterations=budget,
    )
    return best, trace
