"""
Worked problem builders.

Bin packing: n objects with weights w_j go into m boxes with capacities c_i.
Variable v[i][j] means object j is in box i.
    unicity  (tag 1): for each object j, sum_i v[i][j] = 1
    capacity (tag 2): for each box i,    sum_j w_j v[i][j] <= c_i
"""

from typing import Optional, Sequence, Union

from pbcnf.encoders import Encoder, EncoderName
from pbcnf.logger import get_logger
from pbcnf.model import InputModel, TagContext, Variable, make_eq, make_leq
from pbcnf.output import CnfProblem

logger = get_logger(__name__)

UNICITY_TAG = 1
CAPACITY_TAG = 2


def bin_packing(
    weights: Sequence[int],
    capacities: Sequence[int],
    ctx: Optional[TagContext] = None,
) -> tuple[InputModel, list[list[Variable]]]:
    """The bin-packing input model and its m x n variable matrix"""
    ctx = ctx or TagContext()
    m = InputModel()
    v = [m.new_variables(len(weights)) for _ in capacities]

    ctx.set_tags(UNICITY_TAG)
    ones = [1] * len(capacities)
    for j in range(len(weights)):
        m.add_constraints(make_eq(ones, [row[j].pos_lit() for row in v], 1, ctx))

    ctx.set_tags(CAPACITY_TAG)
    for row, capacity in zip(v, capacities):
        m.add_constraint(
            make_leq(weights, [var.pos_lit() for var in row], capacity, ctx)
        )
    logger.info(
        f"Bin packing of {len(weights)} objects into {len(capacities)} boxes: "
        f"{len(m)} constraints"
    )
    return m, v


def encode_bin_packing(
    weights: Sequence[int],
    capacities: Sequence[int],
    unicity_encoder: Union[Encoder, EncoderName, str] = EncoderName.BDD,
    capacity_encoder: Union[Encoder, EncoderName, str] = EncoderName.BARGRAPH,
) -> tuple[CnfProblem, list[list[Variable]]]:
    """Translated bin-packing problem, unicity and capacity constraints each with their own encoder"""
    m, v = bin_packing(weights, capacities)
    out = CnfProblem()
    out.assign_encoder(UNICITY_TAG, unicity_encoder)
    out.assign_encoder(CAPACITY_TAG, capacity_encoder)
    out.read(m)
    return out, v
