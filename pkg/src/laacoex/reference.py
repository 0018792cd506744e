"""Embedded reference table for the two-scheme validation grid.

Values live in ``data/table1.json`` as strings with their printed digits.  The
file carries a SHA-256 of its canonical JSON body; :func:`load_table1` refuses
to return data whose body no longer matches that digest or the digest pinned
here.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import LaaCoexError

__all__ = ["TABLE1_SHA256", "ReferenceCell", "ReferenceTable", "load_table1", "canonical_digest"]

TABLE1_SHA256 = "ad97724911c5ffa7add07ba6cdc9c066d44830ff30138f9695089e4b9bf8593b"


@dataclass(frozen=True)
class ReferenceCell:
    scheme: str
    metric: str          # "p_bl" or "p_bw"
    lambda_l: float
    analytic: float
    simulation: float
    error_pct: float
    error_anomalous: bool = False  # printed error percentage inconsistent with its own row

    @property
    def key(self) -> tuple[str, str, float]:
        return (self.scheme, self.metric, self.lambda_l)


@dataclass(frozen=True)
class ReferenceTable:
    parameters: dict
    lambda_l: tuple[float, ...]
    cells: tuple[ReferenceCell, ...]
    sha256: str

    def cell(self, scheme: str, metric: str, lambda_l: float) -> ReferenceCell:
        for c in self.cells:
            if c.key == (scheme, metric, float(lambda_l)):
                return c
        raise KeyError((scheme, metric, lambda_l))

    @property
    def schemes(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(c.scheme for c in self.cells))


def canonical_digest(payload: dict) -> str:
    body = {k: v for k, v in payload.items() if k != "sha256"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@lru_cache(maxsize=1)
def load_table1() -> ReferenceTable:
    raw = resources.files("laacoex").joinpath("data/table1.json").read_text(encoding="utf-8")
    payload = json.loads(raw)
    digest = canonical_digest(payload)
    if digest != payload.get("sha256") or digest != TABLE1_SHA256:
        raise LaaCoexError(f"reference table checksum mismatch (got {digest})")
    flagged = {(a["scheme"], a["metric"], float(a["lambda_l"])) for a in payload["anomalous"]}
    lams = tuple(float(v) for v in payload["lambda_l"])
    cells = []
    for scheme, metrics in payload["cells"].items():
        for metric, rows in metrics.items():
            for i, lam in enumerate(lams):
                cells.append(ReferenceCell(
                    scheme=scheme,
                    metric=metric,
                    lambda_l=lam,
                    analytic=float(rows["analytic"][i]),
                    simulation=float(rows["simulation"][i]),
                    error_pct=float(rows["error_pct"][i]),
                    error_anomalous=(scheme, metric, lam) in flagged,
                ))
    order = {"UFA": 0, "UTA": 1}
    cells.sort(key=lambda c: (order.get(c.scheme, 9), c.metric, c.lambda_l))
    return ReferenceTable(dict(payload["parameters"]), lams, tuple(cells), digest)
