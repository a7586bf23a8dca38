"""On-disk formats for networks and datasets.

Both formats are JSON documents described by pydantic models. Floats are written in their shortest round-trip
representation, so reading a file back yields bit-identical coefficients.
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

from pathlib import Path
from typing import Literal, Self

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveInt,
    ValidationError,
    model_validator,
)

from repunet.datagen import NoiseKind, NoisyDataset
from repunet.errors import ModelFormatError
from repunet.network import MultiIndex, Polynomial, RepuNetwork, Scaling

FORMAT_VERSION = 1


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NeuronModel(_StrictModel):
    a: float
    w: list[float]
    b: float


class TailTermModel(_StrictModel):
    coef: float
    alpha: list[NonNegativeInt]


class NetworkFile(_StrictModel):
    format_version: Literal[1] = FORMAT_VERSION
    k: PositiveInt
    d: PositiveInt
    scaling: Scaling = Scaling.SUM
    a0: float = 0.0
    neurons: list[NeuronModel] = []
    poly_tail: list[TailTermModel] | None = None
    """`None` means the network has no tail; an empty list is a present, zero tail."""

    @model_validator(mode="after")
    def _check_shapes(self) -> Self:
        for idx, neuron in enumerate(self.neurons):
            if len(neuron.w) != self.d:
                msg = f"neurons.{idx}.w has length {len(neuron.w)}, expected d={self.d}"
                raise ValueError(msg)
        for idx, term in enumerate(self.poly_tail or []):
            if len(term.alpha) != self.d:
                msg = f"poly_tail.{idx}.alpha has length {len(term.alpha)}, expected d={self.d}"
                raise ValueError(msg)
            if sum(term.alpha) > self.k:
                msg = f"poly_tail.{idx}.alpha has order {sum(term.alpha)} > k={self.k}"
                raise ValueError(msg)
        return self

    @classmethod
    def from_network(cls, net: RepuNetwork) -> Self:
        tail = None
        if net.tail is not None:
            tail = [TailTermModel(coef=coef, alpha=list(alpha.orders)) for coef, alpha in net.tail.terms]
        return cls(
            k=net.k,
            d=net.d,
            scaling=net.scaling,
            a0=net.a0,
            neurons=[NeuronModel(a=a, w=w.tolist(), b=b) for a, w, b in net.neurons],
            poly_tail=tail,
        )

    def to_network(self) -> RepuNetwork:
        tail = None
        if self.poly_tail is not None:
            tail = Polynomial.from_terms(self.d, [(t.coef, MultiIndex(tuple(t.alpha))) for t in self.poly_tail])
        return RepuNetwork.from_neurons(
            self.k,
            self.d,
            [(n.a, n.w, n.b) for n in self.neurons],
            a0=self.a0,
            scaling=self.scaling,
            tail=tail,
        )


class DatasetFile(_StrictModel):
    format_version: Literal[1] = FORMAT_VERSION
    d: PositiveInt
    points: list[list[float]]
    values: list[float]
    weights: list[float]
    delta_nominal: NonNegativeFloat
    delta_realized: NonNegativeFloat
    seed: int
    noise_kind: NoiseKind = NoiseKind.GAUSSIAN_IID

    @model_validator(mode="after")
    def _check_shapes(self) -> Self:
        if not self.points:
            msg = "a dataset needs at least one point"
            raise ValueError(msg)
        if len(self.values) != len(self.points) or len(self.weights) != len(self.points):
            msg = (
                f"points, values and weights must have equal lengths, got {len(self.points)}, {len(self.values)} and "
                f"{len(self.weights)}"
            )
            raise ValueError(msg)
        for idx, point in enumerate(self.points):
            if len(point) != self.d:
                msg = f"points.{idx} has length {len(point)}, expected d={self.d}"
                raise ValueError(msg)
        return self

    @classmethod
    def from_dataset(cls, dataset: NoisyDataset) -> Self:
        return cls(
            d=dataset.d,
            points=dataset.sample_points.tolist(),
            values=dataset.values.tolist(),
            weights=dataset.training_weights.tolist(),
            delta_nominal=dataset.delta_nominal,
            delta_realized=dataset.delta_realized,
            seed=dataset.noise_seed,
            noise_kind=dataset.noise_kind,
        )

    def to_dataset(self) -> NoisyDataset:
        return NoisyDataset(
            sample_points=np.array(self.points, dtype=np.float64),
            values=np.array(self.values, dtype=np.float64),
            training_weights=np.array(self.weights, dtype=np.float64),
            delta_nominal=self.delta_nominal,
            delta_realized=self.delta_realized,
            noise_seed=self.seed,
            noise_kind=self.noise_kind,
        )


def serialize_network(net: RepuNetwork) -> str:
    return NetworkFile.from_network(net).model_dump_json(indent=2)


def deserialize_network(text: str | bytes, source: str = "<string>") -> RepuNetwork:
    """Parses a model file.

    Raises:
        ModelFormatError: If the document is not valid JSON (the message carries line and column) or violates the
            format, e.g. a tail exponent of order larger than `k`.
    """
    try:
        return NetworkFile.model_validate_json(text).to_network()
    except (ValidationError, ValueError) as exc:
        raise ModelFormatError(source, str(exc)) from exc


def read_network(path: Path) -> RepuNetwork:
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ModelFormatError(str(path), str(exc)) from exc
    return deserialize_network(text, str(path))


def serialize_dataset(dataset: NoisyDataset) -> str:
    return DatasetFile.from_dataset(dataset).model_dump_json(indent=2)


def deserialize_dataset(text: str | bytes, source: str = "<string>") -> NoisyDataset:
    try:
        return DatasetFile.model_validate_json(text).to_dataset()
    except (ValidationError, ValueError) as exc:
        raise ModelFormatError(source, str(exc)) from exc


def read_dataset(path: Path) -> NoisyDataset:
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ModelFormatError(str(path), str(exc)) from exc
    return deserialize_dataset(text, str(path))
