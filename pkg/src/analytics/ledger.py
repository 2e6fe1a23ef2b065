"""
Bookkeeping of the exponent chain behind the power-law decay:
H -> zero count M -> alpha -> A -> epsilon_0 -> p.
"""
import math
from dataclasses import dataclass, asdict

import pandas as pd

from src.errors import DomainError
from src.zeros.finder import STRIP_H

RIESZ_RATE = 9.0 / 7.0


def zero_count_bound(sup_bound: float) -> int:
    """Largest integer <= log2(sup) + 1."""
    return int(math.floor(math.log2(sup_bound) + 1.0))


@dataclass
class ExponentLedger:
    H: float
    sup_bound: float
    M: int
    loose_sup_bound: float
    loose_M: int
    alpha_min: float
    A_min: float
    epsilon0_max: float
    epsilon_star_max: float
    betas: tuple
    p_max: dict

    def p_denominators(self) -> dict:
        return {beta: 1.0 / p for beta, p in self.p_max.items()}

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for beta, p in self.p_max.items():
            rows.append({
                "H": self.H,
                "M": self.M,
                "loose_M": self.loose_M,
                "alpha_min": self.alpha_min,
                "A_min": self.A_min,
                "epsilon0_max": self.epsilon0_max,
                "epsilon0_denominator": 1.0 / self.epsilon0_max,
                "epsilon_star_max": self.epsilon_star_max,
                "beta": beta,
                "p_max": p,
                "p_denominator": 1.0 / p,
            })
        return pd.DataFrame(rows)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["p_max"] = {str(k): v for k, v in self.p_max.items()}
        return data


def exponent_ledger(H: float = STRIP_H, betas=(2.0, 3.0), alpha_margin: float = 0.0, A_margin: float = 0.0) -> ExponentLedger:
    """
    M from sup |phi~| <= 1 + 2 e^H on the strip; alpha_min = 5 / log_3(9/7);
    A_min = M alpha + 2; epsilon_0 = 1 / (2A); p = 1 / (1/epsilon_0 + beta).
    Margins are added to alpha and A before the next link of the chain.
    """
    if H <= 0:
        raise DomainError("H must be positive")
    if alpha_margin < 0 or A_margin < 0:
        raise DomainError("margins are nonnegative")

    sup_bound = 1.0 + 2.0 * math.exp(H)
    loose = (math.e + 1.0) * math.exp(H)
    M = zero_count_bound(sup_bound)

    alpha = 5.0 / math.log(RIESZ_RATE, 3) + alpha_margin
    A = M * alpha + 2.0 + A_margin
    eps0 = 1.0 / (2.0 * A)
    p_max = {float(beta): 1.0 / (1.0 / eps0 + beta) for beta in betas}

    return ExponentLedger(
        H=H,
        sup_bound=sup_bound,
        M=M,
        loose_sup_bound=loose,
        loose_M=zero_count_bound(loose),
        alpha_min=alpha,
        A_min=A,
        epsilon0_max=eps0,
        epsilon_star_max=3.0 ** (-alpha * M),
        betas=tuple(float(b) for b in betas),
        p_max=p_max,
    )
