"""Unit systems.

All field-level formulas are written with explicit hbar, c, epsilon0, mu0 so
the same code runs in SI and in the natural preset hbar = c = epsilon0 = 1
used by the test suite.  mu0 is derived from epsilon0 and c so that
c = 1/sqrt(epsilon0 mu0) holds exactly in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _const


@dataclass(frozen=True)
class Units:
    hbar: float
    c: float
    epsilon0: float

    @property
    def mu0(self) -> float:
        return 1.0 / (self.epsilon0 * self.c ** 2)

    @classmethod
    def si(cls) -> "Units":
        return cls(hbar=_const.hbar, c=_const.c, epsilon0=_const.epsilon_0)

    @classmethod
    def natural(cls) -> "Units":
        return cls(hbar=1.0, c=1.0, epsilon0=1.0)


SI = Units.si()
NATURAL = Units.natural()
