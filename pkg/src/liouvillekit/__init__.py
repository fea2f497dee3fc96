"""Certified Liouville numbers.

Exact real arithmetic with certified rational enclosures, continued
fractions, Liouville witnesses, steered constructions of simultaneous
Liouville points and exact tests for independence of exponentials.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .cfrac import CFrac, best_approx_check, cf_expand, convergents, maillet_root_witnesses
from .constructor import (
    ConstructionLog,
    certify_steered,
    erdos_split_prod,
    erdos_split_sum,
    implicit_pair,
    orbit_construct,
    orbit_element,
    steer,
    steered_image,
)
from .core import (
    LiouvilleCertificate,
    SeriesConstant,
    Witness,
    certify_level,
    series_constant,
    u_level,
    un_membership,
    verify_certificate,
)
from .errors import LiouvilleError
from .expindep import (
    ExponentBasis,
    IndepVerdict,
    IntegerRelation,
    alg_indep_exp,
    burger_annihilator,
    exponent_basis,
    lin_indep_exp,
    monomial_certificate,
)
from .poly import BivarPolyQ, PolyQ
from .reals import ExactReal, Interval, exp, field_op, nearest_int, nearest_int_dist, pow_rational, refine, sqrt
from .serialize import certificate_json, load_certificate, parse_map, parse_real, verify_document

__all__ = [name for name in dir() if not name.startswith("_")]
