"""Explicit joint distributions over X^d x {0,1} for oracle-scale instances.

Configurations are indexed in mixed radix over (x_1, ..., x_d) with x_d
varying fastest (numpy C order), and the flat probability vector interleaves
the two label values: p[2 * config + y].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InstanceTooLarge, InvalidDistribution
from .schema import CategoricalSchema

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class JointDistribution:
    schema: CategoricalSchema
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel()
        want = 2 * self.schema.n_configurations()
        if p.size != want:
            raise InvalidDistribution(f"probability vector has {p.size} entries, expected {want}")
        if np.any(p < 0):
            raise InvalidDistribution("negative probability entry")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise InvalidDistribution(f"probabilities sum to {p.sum():.12g}, not 1")
        object.__setattr__(self, "p", p)

    @property
    def n_configs(self) -> int:
        return self.schema.n_configurations()

    def table(self) -> np.ndarray:
        """Probabilities as an (n_configs, 2) array with columns y=0, y=1."""
        return self.p.reshape(self.n_configs, 2)

    def config_index(self, row) -> int:
        """Flat configuration index of a 1-based row."""
        idx = tuple(int(x) - 1 for x in row)
        return int(np.ravel_multi_index(idx, self.schema.cardinalities))

    def config_row(self, index: int) -> tuple[int, ...]:
        """1-based row of a flat configuration index."""
        idx = np.unravel_index(int(index), self.schema.cardinalities)
        return tuple(int(v) + 1 for v in idx)

    def prob(self, row, y: int) -> float:
        return float(self.p[2 * self.config_index(row) + int(y)])

    def p_y0(self) -> float:
        return float(self.table()[:, 0].sum())

    def marginal_x(self) -> np.ndarray:
        return self.table().sum(axis=1)

    def dump(self) -> str:
        """Textual instance dump: a cardinality header, then one line per
        outcome "x1,...,xd,y,prob" with round-trip-exact reals."""
        lines = [",".join(str(m) for m in self.schema.cardinalities)]
        tab = self.table()
        for cfg in range(self.n_configs):
            row = self.config_row(cfg)
            for y in (0, 1):
                cells = [str(v) for v in row] + [str(y), f"{tab[cfg, y]:.17g}"]
                lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def parse_dump(text: str) -> JointDistribution:
    """Inverse of JointDistribution.dump."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidDistribution("empty instance dump")
    try:
        cards = tuple(int(tok) for tok in lines[0].split(","))
    except ValueError as exc:
        raise InvalidDistribution(f"bad cardinality header {lines[0]!r}") from exc
    schema = CategoricalSchema.from_cardinalities(cards)
    p = np.zeros(2 * schema.n_configurations())
    filled = np.zeros(p.size, dtype=bool)
    for ln in lines[1:]:
        toks = ln.split(",")
        if len(toks) != len(cards) + 2:
            raise InvalidDistribution(f"bad outcome line {ln!r}")
        row = tuple(int(t) for t in toks[: len(cards)])
        y = int(toks[len(cards)])
        if y not in (0, 1) or any(not 1 <= x <= m for x, m in zip(row, cards)):
            raise InvalidDistribution(f"outcome {ln!r} outside the alphabet")
        cfg = int(np.ravel_multi_index(tuple(x - 1 for x in row), cards))
        p[2 * cfg + y] = float(toks[-1])
        filled[2 * cfg + y] = True
    if not filled.all():
        raise InvalidDistribution("instance dump does not cover every outcome")
    return JointDistribution(schema=schema, p=p)


@dataclass(frozen=True)
class DecisionRule:
    """Probability of predicting label 0 for every configuration."""

    q_delta: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q_delta, dtype=float).ravel()
        if np.any(q < -1e-12) or np.any(q > 1 + 1e-12):
            raise InvalidDistribution("decision-rule probabilities outside [0, 1]")
        object.__setattr__(self, "q_delta", np.clip(q, 0.0, 1.0))


def check_enumerable(schema: CategoricalSchema, max_outcomes: int = 2_000_000):
    n = 2 * schema.n_configurations()
    if n > max_outcomes:
        raise InstanceTooLarge(f"{n} outcomes exceed the cap of {max_outcomes}")
    return n
