"""Выходные схемы: сертификаты и результаты команд в JSON-представлении."""
from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

from app.core.config import Settings
from app.models.certificates import (
    ContainmentRecord,
    FarkasCertificate,
    L1Certificate,
    MajorizationCertificate,
    Order,
    SamplerSummary,
    SeparatingFunctional,
    Verdict,
)
from app.models.measure import FiniteMeasureSpace
from app.models.operators import State
from app.models.povm import Povm, QuantumRandomVariable
from app.schemas.inputs import MatrixIn, SpaceIn, atom_matrices_from_json, atom_matrices_to_json
from app.utils import codec

AtomMatrices = dict[str, MatrixIn]


class RunConfig(BaseModel):
    """Параметры одного запуска команды; переопределяют Settings."""

    verb: str
    inputs: dict[str, str] = Field(default_factory=dict)
    tol: float | None = Field(default=None, gt=0)
    seed: int = 42
    output: str | None = None

    def apply(self, cfg: Settings) -> Settings:
        update: dict[str, object] = {"seed": self.seed}
        if self.tol is not None:
            update["sdp_tol"] = self.tol
        return cfg.model_copy(update=update)


# --- полунорма ---


class L1CertificateOut(BaseModel):
    kind: Literal["l1"] = "l1"
    space: SpaceIn
    dim: int
    effects: AtomMatrices
    rho: MatrixIn | None = None
    f: AtomMatrices
    value: float | None
    reported_value: float | None
    dual_lower_bound: float | None
    gap: float | None
    method: str
    decomposition: list[AtomMatrices] = Field(min_length=4, max_length=4)
    dual_state: MatrixIn

    @classmethod
    def from_domain(cls, f: QuantumRandomVariable, povm: Povm, cert: L1Certificate,
                    rho: State | None = None) -> L1CertificateOut:
        space = f.space
        return cls(
            space=SpaceIn.from_domain(space),
            dim=f.dim,
            effects=atom_matrices_to_json(space, povm.effects),
            rho=codec.matrix_to_json(rho.matrix) if rho is not None else None,
            f=atom_matrices_to_json(space, f.values),
            value=cert.value,
            reported_value=cert.reported_value,
            dual_lower_bound=cert.dual_lower_bound,
            gap=cert.gap,
            method=cert.method,
            decomposition=[atom_matrices_to_json(space, part.values) for part in cert.decomposition],
            dual_state=codec.matrix_to_json(cert.dual_state),
        )

    def to_domain(self) -> tuple[QuantumRandomVariable, Povm, State | None, L1Certificate]:
        space = self.space.to_domain()
        f = QuantumRandomVariable(space, atom_matrices_from_json(self.f, space, self.dim, "f"))
        povm = Povm(space, atom_matrices_from_json(self.effects, space, self.dim, "effects"))
        rho = State(codec.matrix_from_json(self.rho, self.dim, "rho")) if self.rho is not None else None
        parts = tuple(
            QuantumRandomVariable(space, atom_matrices_from_json(p, space, self.dim, f"decomposition[{i}]"))
            for i, p in enumerate(self.decomposition)
        )
        cert = L1Certificate(
            value=_finite(self.value),
            decomposition=parts,  # type: ignore[arg-type]
            dual_state=codec.matrix_from_json(self.dual_state, self.dim, "dual_state"),
            dual_lower_bound=_finite(self.dual_lower_bound),
            method=self.method,
        )
        return f, povm, rho, cert


def _finite(value: float | None) -> float:
    return float("nan") if value is None else float(value)


# --- мажоризация ---


class SubsetWeight(BaseModel):
    subset: list[int]
    weight: float


class ContainmentOut(BaseModel):
    k: int
    subset: list[int]
    weights: list[SubsetWeight]
    residual: float | None

    @classmethod
    def from_domain(cls, rec: ContainmentRecord) -> ContainmentOut:
        return cls(
            k=rec.k,
            subset=list(rec.subset),
            weights=[SubsetWeight(subset=list(t), weight=w) for t, w in sorted(rec.weights.items())],
            residual=rec.residual,
        )


class FarkasOut(BaseModel):
    y: list[float | None]
    pairing: float | None
    max_violation: float | None

    @classmethod
    def from_domain(cls, farkas: FarkasCertificate) -> FarkasOut:
        return cls(y=farkas.y.tolist(), pairing=farkas.pairing, max_violation=farkas.max_violation)

    def vector(self) -> np.ndarray:
        return np.array([_finite(v) for v in self.y])


class SamplerOut(BaseModel):
    seed: int
    samples: int
    refuted: bool
    worst_margin: float | None

    @classmethod
    def from_domain(cls, s: SamplerSummary) -> SamplerOut:
        return cls(seed=s.seed, samples=s.samples, refuted=s.refuted, worst_margin=s.worst_margin)


class MajorizationCertificateOut(BaseModel):
    kind: Literal["majorization"] = "majorization"
    order: Order
    verdict: Verdict
    space: SpaceIn
    dim: int
    f: AtomMatrices
    g: AtomMatrices
    witness: list[list[float]] | None = None
    refuting: MatrixIn | None = None
    refuting_margin: float | None = None
    containment: list[ContainmentOut] = Field(default_factory=list)
    farkas: FarkasOut | None = None
    separating: AtomMatrices | None = None
    separation_margin: float | None = None
    residual: float | None = None
    sampler: SamplerOut | None = None
    notes: list[str] = Field(default_factory=list)

    @classmethod
    def from_domain(cls, f: QuantumRandomVariable, g: QuantumRandomVariable,
                    cert: MajorizationCertificate) -> MajorizationCertificateOut:
        space = f.space
        return cls(
            order=cert.order,
            verdict=cert.verdict,
            space=SpaceIn.from_domain(space),
            dim=f.dim,
            f=atom_matrices_to_json(space, f.values),
            g=atom_matrices_to_json(space, g.values),
            witness=cert.witness.matrix.tolist() if cert.witness is not None else None,
            refuting=codec.matrix_to_json(cert.refuting) if cert.refuting is not None else None,
            refuting_margin=cert.refuting_margin,
            containment=[ContainmentOut.from_domain(r) for r in cert.containment],
            farkas=FarkasOut.from_domain(cert.farkas) if cert.farkas is not None else None,
            separating=atom_matrices_to_json(space, cert.separating.weights) if cert.separating else None,
            separation_margin=cert.separation_margin,
            residual=cert.residual,
            sampler=SamplerOut.from_domain(cert.sampler) if cert.sampler is not None else None,
            notes=list(cert.notes),
        )

    def pair(self) -> tuple[FiniteMeasureSpace, np.ndarray, np.ndarray]:
        space = self.space.to_domain()
        return (
            space,
            atom_matrices_from_json(self.f, space, self.dim, "f"),
            atom_matrices_from_json(self.g, space, self.dim, "g"),
        )


class SeparationOut(BaseModel):
    """Результат separate: W по атомам и зазор Re φ(f) − ψ_φ(g), если f ⊀ g."""

    kind: Literal["separation"] = "separation"
    space: SpaceIn
    dim: int
    f: AtomMatrices
    g: AtomMatrices
    separated: bool
    weights: AtomMatrices | None = None
    margin: float | None = None
    seed: int
    trials: int

    @classmethod
    def from_domain(cls, f: QuantumRandomVariable, g: QuantumRandomVariable, phi: SeparatingFunctional | None,
                    margin: float | None, seed: int, trials: int) -> SeparationOut:
        space = f.space
        return cls(
            space=SpaceIn.from_domain(space),
            dim=f.dim,
            f=atom_matrices_to_json(space, f.values),
            g=atom_matrices_to_json(space, g.values),
            separated=phi is not None,
            weights=atom_matrices_to_json(space, phi.weights) if phi is not None else None,
            margin=margin,
            seed=seed,
            trials=trials,
        )


# --- прочие команды ---


class IntegrateOut(BaseModel):
    integral: MatrixIn
    norm: float | None


class RnOut(BaseModel):
    rho: MatrixIn
    induced: dict[str, float | None]
    density: AtomMatrices


class BracketOut(BaseModel):
    """⟨f, gI⟩ и оценка 4‖f‖₁‖g‖∞."""

    value: MatrixIn
    norm: float | None
    l1_value: float | None
    g_sup: float | None
    bound: float | None


class VerifyOut(BaseModel):
    kind: str
    ok: bool
    checks: dict[str, float | None]
    notes: list[str] = Field(default_factory=list)


class ExampleCheckOut(BaseModel):
    name: str
    expected: float | str | None
    actual: float | str | None
    tol: float
    relation: str
    passed: bool


class ExampleReportOut(BaseModel):
    example_id: str
    title: str
    passed: bool
    checks: list[ExampleCheckOut]


class PropertyTallyOut(BaseModel):
    name: str
    passed: int
    failed: int
    skipped: int
    stalled: int
    worst_excess: float | None
    failing_seeds: list[int]


class PropertyReportOut(BaseModel):
    seed: int
    trials: int
    failures: int
    tallies: list[PropertyTallyOut]
