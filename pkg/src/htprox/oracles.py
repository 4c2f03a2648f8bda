"""Rejection-sampling oracles for the proximal conditional pi^{X|Y}(.|y).

Both oracles propose from the forward kernel centred at ``y`` and accept
with probability ``exp(-(V(x) - V*))``:

* RGO: proposal ``N(y, eta I)``.
* RaSO: proposal ``y + eta^(1/alpha) Z`` with ``Z`` unit-time isotropic
  alpha-stable; for alpha = 1 this is ``y + eta Z1/|Z2|``. The same scheme
  is exposed for every alpha in (0, 2] because the acceptance ratio never
  evaluates the proposal density; alpha = 1 is the reference case.

``tail_envelope=True`` enables an alternative exact route for far-out
``y`` on generalized Cauchy targets (alpha in {1, 2} / Gaussian): a
two-component proposal ``w p(. - y) + (1 - w) pi`` with the envelope
``max(pi(|y|/2)/w, p(|y|/2)/(1-w))``. It is chosen only when its
acceptance rate provably beats the global-minimum rule, and keeps the
expected proposal count bounded in ``|y|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .rng import as_generator
from .targets import TargetSpec

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class OracleOutcome:
    sample: np.ndarray
    rejections: int
    corrupted: bool = False


class OracleBudgetError(RuntimeError):
    def __init__(self, budget, detail=""):
        msg = (f"oracle nonterminating; reduce η (proposal budget {budget} exceeded; "
               "use the step-size policy)")
        if detail:
            msg += f" [{detail}]"
        super().__init__(msg)
        self.budget = budget


def _check_common(target: TargetSpec, eta: float, budget: int):
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not math.isfinite(target.min_value):
        raise ValueError("target.min_value must be finite and known")
    if budget < 1:
        raise ValueError("budget must be at least 1")


class _RejectionOracle:
    okind = K.ORACLE_GAUSSIAN

    def __init__(self, target: TargetSpec, eta: float, alpha: float = 2.0,
                 shift: Optional[float] = None, budget: int = DEFAULT_BUDGET,
                 tail_envelope: bool = False, force_python: bool = False):
        _check_common(target, eta, budget)
        self.target = target
        self.eta = float(eta)
        self.alpha = float(alpha)
        self.shift = target.min_value if shift is None else float(shift)
        self.budget = int(budget)
        self.tail_envelope = bool(tail_envelope)
        self.compiled = target.kernel is not None and not force_python
        if self.okind == K.ORACLE_GAUSSIAN:
            self.scale = math.sqrt(self.eta)
        else:
            self.scale = self.eta ** (1.0 / self.alpha)

    def _y(self, y):
        y = np.asarray(y, dtype=float).reshape(self.target.dim)
        return np.ascontiguousarray(y)

    def propose(self, y, rng) -> np.ndarray:
        """One raw proposal around ``y`` with no accept step."""
        x = np.empty(self.target.dim)
        K._propose(as_generator(rng), self.okind, self.alpha, self.scale, self._y(y), x)
        return x

    def _python_call(self, y, gen, eps_tv):
        x = np.empty(self.target.dim)
        if eps_tv > 0.0 and gen.random() < eps_tv:
            K._propose(gen, self.okind, self.alpha, self.scale, y, x)
            return 1, True, x
        n = 0
        while n < self.budget:
            n += 1
            K._propose(gen, self.okind, self.alpha, self.scale, y, x)
            la = self.shift - float(self.target.potential(x))
            u = gen.random()
            if la >= 0.0 or u < math.exp(la):
                return n, False, x
        return -1, False, x

    def _call(self, y, gen, eps_tv=0.0):
        y = self._y(y)
        if self.compiled:
            code, par = self.target.kernel
            x = np.empty(self.target.dim)
            n, bad = K.oracle(code, par, self.okind, y, self.eta, self.alpha, self.shift,
                              gen, self.budget, self.tail_envelope, float(eps_tv), x)
        else:
            if self.tail_envelope:
                raise ValueError("tail_envelope requires a compiled generalized Cauchy target")
            n, bad, x = self._python_call(y, gen, float(eps_tv))
        if n < 0:
            raise OracleBudgetError(self.budget, f"y={y.tolist()}")
        return OracleOutcome(x, n - 1, bool(bad))

    def __call__(self, y, rng) -> OracleOutcome:
        return self._call(y, as_generator(rng))

    def sample_many(self, y, n: int, rng, eps_tv: float = 0.0):
        """``n`` independent calls at the same ``y``.

        Returns ``(samples (n, dim), rejections (n,), corrupted (n,))``.
        """
        gen = as_generator(rng)
        y = self._y(y)
        out = np.empty((n, self.target.dim))
        props = np.zeros(n, dtype=np.int64)
        bad = np.zeros(n, dtype=np.bool_)
        if self.compiled:
            code, par = self.target.kernel
            fail = K.oracle_repeat(code, par, self.okind, y, self.eta, self.alpha,
                                   self.shift, gen, self.budget, self.tail_envelope,
                                   float(eps_tv), out, props, bad)
            if fail >= 0:
                raise OracleBudgetError(self.budget, f"call {fail}, y={y.tolist()}")
        else:
            for j in range(n):
                o = self._call(y, gen, eps_tv)
                out[j], props[j], bad[j] = o.sample, o.rejections + 1, o.corrupted
        return out, props - 1, bad


class RestrictedGaussianOracle(_RejectionOracle):
    """Samples pi(x) exp(-|x - y|^2 / (2 eta)), normalized."""

    okind = K.ORACLE_GAUSSIAN

    def __init__(self, target, eta, budget=DEFAULT_BUDGET, tail_envelope=False,
                 force_python=False):
        super().__init__(target, eta, 2.0, None, budget, tail_envelope, force_python)


class RestrictedStableOracle(_RejectionOracle):
    """Samples pi(x) p^(alpha)(eta; x, y), normalized.

    ``c_low`` replaces V* in the acceptance exponent by a known lower bound
    of V (no minimization needed, more rejections when it is loose).
    """

    okind = K.ORACLE_STABLE

    def __init__(self, target, eta, alpha=1.0, budget=DEFAULT_BUDGET,
                 tail_envelope=False, c_low=None, force_python=False):
        if not 0.0 < alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
        if c_low is not None and c_low > target.min_value:
            raise ValueError(f"C_low={c_low} exceeds the known minimum {target.min_value}")
        super().__init__(target, eta, alpha, c_low, budget, tail_envelope, force_python)


def raso_sample(target, y, eta, alpha=1.0, rng=None, budget=DEFAULT_BUDGET,
                tail_envelope=False) -> OracleOutcome:
    return RestrictedStableOracle(target, eta, alpha, budget, tail_envelope)(y, rng)


def raso_sample_lower_bounded(target, C_low, y, eta, alpha=1.0, rng=None,
                              budget=DEFAULT_BUDGET) -> OracleOutcome:
    return RestrictedStableOracle(target, eta, alpha, budget, c_low=C_low)(y, rng)


def rgo_sample(target, y, eta, rng=None, budget=DEFAULT_BUDGET,
               tail_envelope=False) -> OracleOutcome:
    return RestrictedGaussianOracle(target, eta, budget, tail_envelope)(y, rng)


class InexactOracle:
    """With probability ``eps_tv`` replace the exact answer by ``corruptor(y, gen)``.

    The default corruptor returns one raw proposal of the inner oracle
    without an accept step. Per call the output law is within TV
    ``eps_tv`` of the exact conditional by construction.
    """

    def __init__(self, inner: _RejectionOracle, eps_tv: float,
                 corruptor: Optional[Callable] = None):
        if not 0.0 <= eps_tv <= 1.0:
            raise ValueError(f"eps_tv must lie in [0, 1], got {eps_tv}")
        self.inner = inner
        self.eps_tv = float(eps_tv)
        self.corruptor = corruptor

    def __call__(self, y, rng) -> OracleOutcome:
        gen = as_generator(rng)
        if self.corruptor is None:
            return self.inner._call(y, gen, self.eps_tv)
        if self.eps_tv > 0.0 and gen.random() < self.eps_tv:
            x = np.asarray(self.corruptor(np.asarray(y, dtype=float), gen), dtype=float)
            return OracleOutcome(x, 0, True)
        return self.inner._call(y, gen)


def inexact_oracle_wrapper(inner, eps_tv, y, rng, corruptor=None) -> OracleOutcome:
    return InexactOracle(inner, eps_tv, corruptor)(y, rng)
