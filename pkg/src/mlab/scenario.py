"""JSON scenario, sweep and suite-config schemas.

Complex numbers are written either as plain numbers or as ``[re, im]``
pairs. Keys use camelCase in files.
"""

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator
from pydantic.alias_generators import to_camel


def _to_complex(value):
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        return complex(value[0], value[1])
    raise ValueError("complex numbers must be a number or a [re, im] pair")


Complex = Annotated[complex, BeforeValidator(_to_complex)]
Vector = Annotated[list[Complex], Field(min_length=1)]
Matrix = Annotated[list[Vector], Field(min_length=1)]

ANALYSES = ("gram", "resolution", "decoherence", "irreversible", "conditional-states",
            "steering", "feedback")
READOUT_ANALYSES = {"resolution", "irreversible", "conditional-states", "steering", "feedback"}


class Model(BaseModel):
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, extra="forbid")


class ConditionalUnitariesSpec(Model):
    type: Literal["conditional-unitaries"]
    unitaries: list[Matrix] = Field(min_length=2)
    initial_meter: Vector
    labels: Optional[list[float]] = None


class ProductHamiltonianModel(Model):
    type: Literal["product-hamiltonian"]
    a_values: list[float] = Field(min_length=2)
    b_values: list[float] = Field(min_length=1)
    initial_meter: Vector
    effective_time: float


class TwoPartMeterModel(Model):
    type: Literal["two-part-meter"]
    a_values: list[float] = Field(min_length=2)
    v_values: list[float] = Field(min_length=1)
    dist: list[float] = Field(min_length=1)
    effective_time: float


class StatesSpec(Model):
    type: Literal["states"]
    states: list[Vector] = Field(min_length=2)
    labels: Optional[list[float]] = None


InteractionSpec = Annotated[
    Union[ConditionalUnitariesSpec, ProductHamiltonianModel, TwoPartMeterModel, StatesSpec],
    Field(discriminator="type"),
]


class ComputationalReadout(Model):
    type: Literal["computational"]


class BasisReadout(Model):
    type: Literal["basis-matrix"]
    basis: Matrix


class EraserReadout(Model):
    type: Literal["eraser"]


class OptimalReadout(Model):
    type: Literal["optimal"]
    max_outcomes: Optional[int] = Field(default=None, ge=1)
    restarts: int = Field(default=32, ge=1)
    seed: Optional[int] = None
    method: Literal["alternating", "projected-gradient"] = "alternating"


class HaarReadout(Model):
    type: Literal["haar-random"]
    seed: Optional[int] = None


ReadoutSpec = Annotated[
    Union[ComputationalReadout, BasisReadout, EraserReadout, OptimalReadout, HaarReadout],
    Field(discriminator="type"),
]


class InputState(Model):
    state: Optional[Vector] = None
    density: Optional[Matrix] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.state is None) == (self.density is None):
            raise ValueError("give exactly one of 'state' or 'density'")
        return self


class SteeringSpec(Model):
    r: str
    c: str
    pairs: Optional[list[tuple[int, int]]] = None
    margin: Optional[float] = Field(default=None, ge=0)


class FeedbackSpec(Model):
    readout: str


class Scenario(Model):
    version: Literal[1]
    name: str = "scenario"
    interaction: InteractionSpec
    readouts: dict[str, ReadoutSpec] = Field(default_factory=dict)
    input: Optional[InputState] = None
    analyses: list[Literal[ANALYSES]] = Field(default_factory=list)
    steering: Optional[SteeringSpec] = None
    feedback: Optional[FeedbackSpec] = None

    @model_validator(mode="after")
    def _consistent(self):
        wanted = set(self.analyses)
        if wanted & READOUT_ANALYSES and not self.readouts:
            raise ValueError("readout-dependent analyses need at least one readout")
        if "steering" in wanted:
            if self.steering is None:
                raise ValueError("the steering analysis needs a 'steering' section naming "
                                 "readouts r and c")
            for key in ("r", "c"):
                name = getattr(self.steering, key)
                if name not in self.readouts:
                    raise ValueError(f"steering readout {key}={name!r} is not defined")
        if "feedback" in wanted:
            if self.feedback is None:
                eraser = [k for k, v in self.readouts.items() if v.type == "eraser"]
                if not eraser:
                    raise ValueError("the feedback analysis needs an eraser readout or a "
                                     "'feedback' section")
                self.feedback = FeedbackSpec(readout=eraser[0])
            elif self.feedback.readout not in self.readouts:
                raise ValueError(f"feedback readout {self.feedback.readout!r} is not defined")
        if "conditional-states" in wanted and self.input is None:
            raise ValueError("the conditional-states analysis needs an input state")
        return self


class SweepOutput(Model):
    quantity: Literal["D", "R", "Dirr"]
    pair: tuple[int, int] = (0, 1)
    readout: Optional[str] = None
    name: Optional[str] = None

    @model_validator(mode="after")
    def _needs_readout(self):
        if self.quantity != "D" and self.readout is None:
            raise ValueError(f"quantity {self.quantity} needs a readout")
        return self

    @property
    def column(self):
        if self.name:
            return self.name
        return self.quantity if self.readout is None else f"{self.quantity}_{self.readout}"


class SweepSpec(Model):
    version: Literal[1]
    parameter: str
    values: list[float] = Field(min_length=1)
    outputs: list[SweepOutput] = Field(min_length=1)
    column: Optional[str] = None


class SuiteConfigModel(Model):
    version: Literal[1] = 1
    seed: int = 20240601
    trials: int = Field(default=1000, ge=1)
    n_range: tuple[int, int] = (2, 4)
    d_range: tuple[int, int] = (2, 5)
    haar_samples: int = Field(default=10, ge=1)


class GramInput(Model):
    version: Literal[1] = 1
    gram: Matrix
