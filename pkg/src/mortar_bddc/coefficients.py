"""Element-wise diffusion coefficients rho for the three experiment families.

A field is evaluated per subdomain triangulation and returns one positive
value per element (rho is constant on each triangle).

Random fields draw from numpy's PCG64 bit generator seeded through
``SeedSequence([seed, subdomain_id])``; element ``e`` takes the ``e``-th
uniform draw of that stream, so values depend only on
(seed, subdomain id, element id).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ONE_CHANNEL = ((2 / 5, 3 / 5),)
THREE_CHANNELS = ((1 / 7, 2 / 7), (3 / 7, 4 / 7), (5 / 7, 6 / 7))


@dataclass(frozen=True)
class CoefficientField:
    kind: str
    params: dict = field(default_factory=dict)

    def __call__(self, mesh):
        """Per-element values on ``mesh`` (a Triangulation)."""
        if self.kind == "constant":
            return np.full(mesh.n_elements, float(self.params["value"]))
        if self.kind == "channels":
            rel = (mesh.centroids()[:, 1] - mesh.rect.y0) / mesh.rect.h
            inside = np.zeros(mesh.n_elements, dtype=bool)
            for lo, hi in self.params["bands"]:
                inside |= (rel > lo) & (rel < hi)
            return np.where(inside, float(self.params["eta"]), 1.0)
        if self.kind == "random":
            ss = np.random.SeedSequence([int(self.params["seed"]), int(mesh.subdomain_id)])
            rng = np.random.Generator(np.random.PCG64(ss))
            lo, hi = self.params["lo"], self.params["hi"]
            return 10.0 ** rng.uniform(lo, hi, size=mesh.n_elements)
        raise ValueError(f"unknown coefficient kind {self.kind!r}")

    def describe(self):
        return {"type": self.kind, **{k: (list(map(list, v)) if k == "bands" else v)
                                      for k, v in self.params.items()}}


def constant_field(value=1.0):
    if not value > 0:
        raise ValueError(f"coefficient must be positive, got {value}")
    return CoefficientField("constant", {"value": float(value)})


def channel_field(layout="one", eta=1e3, bands=None):
    """Horizontal high-coefficient bands repeated in every subdomain.

    ``layout`` picks the default bands ('one': middle fifth, 'three': the
    2nd, 4th and 6th sevenths); ``bands`` overrides them with explicit
    relative (lo, hi) heights. Elements are classified by centroid.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if bands is None:
        try:
            bands = {"one": ONE_CHANNEL, "three": THREE_CHANNELS}[layout]
        except KeyError:
            raise ValueError(f"layout must be 'one' or 'three', got {layout!r}") from None
    bands = tuple((float(a), float(b)) for a, b in bands)
    for a, b in bands:
        if not 0 <= a < b <= 1:
            raise ValueError(f"bad band {(a, b)}")
    return CoefficientField("channels", {"layout": layout, "eta": float(eta), "bands": bands})


def random_field(seed=0, lo=-3.0, hi=3.0):
    """rho = 10**r with r ~ U(lo, hi) independently per element."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    return CoefficientField("random", {"seed": int(seed), "lo": float(lo), "hi": float(hi)})


def field_from_descriptor(desc):
    """Build a field from a config descriptor such as
    ``{"type": "random", "seed": 3, "lo": -3, "hi": 3}``."""
    desc = dict(desc)
    kind = desc.pop("type")
    if kind == "constant":
        return constant_field(desc.get("value", 1.0))
    if kind == "channels":
        return channel_field(desc.get("layout", "one"), desc.get("eta", 1e3), desc.get("bands"))
    if kind == "random":
        return random_field(desc.get("seed", 0), desc.get("lo", -3.0), desc.get("hi", 3.0))
    raise ValueError(f"unknown coefficient type {kind!r}")
