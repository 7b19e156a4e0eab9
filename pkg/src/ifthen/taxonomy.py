"""The nine if-then relation types and their fixed taxonomy coordinates.

Each relation (dimension) answers a typed question about an event:
what the agent intended, what they need beforehand, how participants
react, what happens next, and how the agent is perceived. Dimensions
are classified along four axes: the kind of content they predict, their
causal role relative to the event, whether they concern the event's
agent or its (possibly implied) other participants, and whether the
predicted content is deliberate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Dimension(str, Enum):
    """One of the nine typed if-then relations."""

    xIntent = "xIntent"
    xNeed = "xNeed"
    xAttr = "xAttr"
    xEffect = "xEffect"
    xReact = "xReact"
    xWant = "xWant"
    oEffect = "oEffect"
    oReact = "oReact"
    oWant = "oWant"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


class ContentType(str, Enum):
    """What kind of content the dimension predicts."""

    MentalState = "MentalState"
    Event = "Event"
    Persona = "Persona"


class CausalCategory(str, Enum):
    """Causal role of the predicted content relative to the event."""

    Cause = "Cause"
    Effect = "Effect"
    Stative = "Stative"


class Subject(str, Enum):
    """Whose side of the event the dimension describes."""

    Agent = "Agent"
    Theme = "Theme"


class Volition(str, Enum):
    """Whether the predicted content is deliberate."""

    Voluntary = "Voluntary"
    Involuntary = "Involuntary"


@dataclass(frozen=True)
class TaxonomyCoords:
    """Position of a dimension in the four-axis taxonomy."""

    content_type: ContentType
    causal_category: CausalCategory
    subject: Subject
    volition: Volition

    def __post_init__(self) -> None:
        if self.content_type is ContentType.Persona:
            if self.causal_category is not CausalCategory.Stative:
                raise ValueError("persona dimensions must be stative")
        if self.subject is Subject.Theme:
            if self.causal_category is CausalCategory.Cause:
                raise ValueError("only the agent causes the event")


_COORDS: dict[Dimension, TaxonomyCoords] = {
    Dimension.xIntent: TaxonomyCoords(
        ContentType.MentalState, CausalCategory.Cause, Subject.Agent, Volition.Voluntary
    ),
    Dimension.xNeed: TaxonomyCoords(
        ContentType.Event, CausalCategory.Cause, Subject.Agent, Volition.Voluntary
    ),
    Dimension.xAttr: TaxonomyCoords(
        ContentType.Persona, CausalCategory.Stative, Subject.Agent, Volition.Involuntary
    ),
    Dimension.xEffect: TaxonomyCoords(
        ContentType.Event, CausalCategory.Effect, Subject.Agent, Volition.Involuntary
    ),
    Dimension.xReact: TaxonomyCoords(
        ContentType.MentalState, CausalCategory.Effect, Subject.Agent, Volition.Involuntary
    ),
    Dimension.xWant: TaxonomyCoords(
        ContentType.Event, CausalCategory.Effect, Subject.Agent, Volition.Voluntary
    ),
    Dimension.oEffect: TaxonomyCoords(
        ContentType.Event, CausalCategory.Effect, Subject.Theme, Volition.Involuntary
    ),
    Dimension.oReact: TaxonomyCoords(
        ContentType.MentalState, CausalCategory.Effect, Subject.Theme, Volition.Involuntary
    ),
    Dimension.oWant: TaxonomyCoords(
        ContentType.Event, CausalCategory.Effect, Subject.Theme, Volition.Voluntary
    ),
}


def classify_dimension(dim: Dimension) -> TaxonomyCoords:
    """Return the fixed taxonomy coordinates of a dimension.

    Total over the nine members; the coordinate table is fixed data.
    """
    return _COORDS[Dimension(dim)]
