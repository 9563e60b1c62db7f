"""End-to-end structural analysis and the report document built from it."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .decomposition import (
    Decomposition,
    SubnetworkVerdict,
    existence_verdict,
    finest_independent_decomposition,
    subnetwork_verdicts,
)
from .errors import ShapeMismatch
from .kinetics import (
    Classification,
    KineticModel,
    SubspaceBasis,
    classify_system,
    is_pl_rdk,
    kinetic_deficiency,
    kinetic_flux_orthocomplement,
    kinetic_flux_subspace,
    stoichiometric_subspace,
)
from .network import (
    Network,
    StructuralIndices,
    conserved_quantity_basis,
    is_conservative,
    is_weakly_reversible,
    linkage_classes,
    structural_indices,
)
from .structural import (
    DecompositionArgument,
    EmptySignIntersection,
    InjectivityCertificate,
    MixedSignMonomials,
    MultistatVerdict,
    Note,
    SignWitness,
    acr_species,
    format_sign,
    multistationarity_pipeline,
)


@dataclass
class Analysis:
    network: Network
    model: KineticModel
    indices: StructuralIndices
    weakly_reversible: bool
    conservative: bool
    conservation_witness: tuple | None
    pl_rdk: bool
    stoichiometric: SubspaceBasis
    kinetic_flux: SubspaceBasis | None
    orthocomplement: SubspaceBasis | None
    kinetic_deficiency: int | None
    classification: Classification | None
    verdict: MultistatVerdict
    acr: list[str] | None
    decomposition: Decomposition
    subnetwork_verdicts: list[SubnetworkVerdict]
    existence: bool | None


def analyze(net: Network, km: KineticModel) -> Analysis:
    """Everything that does not need numeric rate constants."""
    wr = is_weakly_reversible(net)
    cons, witness = is_conservative(net)
    flux = ortho = None
    kdef = None
    acr = None
    if wr:
        flux = kinetic_flux_subspace(km)
        ortho = kinetic_flux_orthocomplement(km)
        kdef = kinetic_deficiency(km)
        acr = acr_species(km)
    try:
        cls = classify_system(km)
    except ShapeMismatch:
        cls = None
    dec = finest_independent_decomposition(net)
    return Analysis(
        network=net,
        model=km,
        indices=structural_indices(net),
        weakly_reversible=wr,
        conservative=cons,
        conservation_witness=witness,
        pl_rdk=is_pl_rdk(km),
        stoichiometric=stoichiometric_subspace(net),
        kinetic_flux=flux,
        orthocomplement=ortho,
        kinetic_deficiency=kdef,
        classification=cls,
        verdict=multistationarity_pipeline(net, km),
        acr=acr,
        decomposition=dec,
        subnetwork_verdicts=subnetwork_verdicts(dec, km) if dec.independent else [],
        existence=existence_verdict(net, km),
    )


def _evidence_doc(ev, net: Network) -> dict:
    if isinstance(ev, SignWitness):
        return {"kind": "sign-witness", "sign": format_sign(ev.sign), "x": list(ev.x), "w": list(ev.w)}
    if isinstance(ev, EmptySignIntersection):
        return {"kind": "empty-sign-intersection", "orthocomplement_sign_patterns": len(ev.sign_patterns)}
    if isinstance(ev, InjectivityCertificate):
        terms = [{"monomial": ev.determinant.format_monomial(e), "coefficient": c} for e, c in ev.determinant.sorted_terms()]
        return {"kind": "injectivity", "sign": ev.sign, "determinant": terms}
    if isinstance(ev, MixedSignMonomials):
        return {"kind": "mixed-signs", "reason": ev.reason, "positive": list(ev.positive), "negative": list(ev.negative)}
    if isinstance(ev, DecompositionArgument):
        return {
            "kind": "decomposition",
            "subnetworks": ev.decomposition.labels(net),
            "verdicts": [{"index": v.index, "verdict": v.verdict.value, "rule": v.rule} for v in ev.verdicts],
        }
    if isinstance(ev, Note):
        return {"kind": "note", "reason": ev.reason}
    return {"kind": type(ev).__name__}


def _basis_doc(b: SubspaceBasis | None):
    if b is None:
        return None
    return {"dimension": b.dimension, "basis": [list(v) for v in b.basis]}


def report_document(a: Analysis) -> dict:
    net, km = a.network, a.model
    names = net.species_names
    cls = None
    if a.classification is not None:
        c = a.classification
        cls = {
            "label": c.label.value,
            "P": c.P,
            "Q": c.Q,
            "Rp": c.Rp,
            "Rq": c.Rq,
            "pair": [net.reactions[k].label for k in c.pair],
            "species": [names[i] for i in c.species],
        }
    ix = a.indices
    return {
        "network": {
            "species": names,
            "reactions": [
                {"label": r.label, "equation": net.format_reaction(k), "rate": km.rate_names[k], "orders": list(km.F.row(k))}
                for k, r in enumerate(net.reactions)
            ],
            "rate_values": list(km.rate_values) if km.rate_values is not None else None,
        },
        "indices": {"n": ix.n, "l": ix.l, "sl": ix.sl, "t": ix.t, "n_r": ix.n_r, "s": ix.s, "deficiency": ix.delta},
        "weakly_reversible": a.weakly_reversible,
        "conservative": a.conservative,
        "conservation_witness": list(a.conservation_witness) if a.conservation_witness else None,
        "conserved_basis": [list(w) for w in conserved_quantity_basis(net)],
        "linkage_classes": [[net.complexes[i].format(names) for i in lc] for lc in linkage_classes(net)],
        "pl_rdk": a.pl_rdk,
        "subspaces": {
            "stoichiometric": _basis_doc(a.stoichiometric),
            "kinetic_flux": _basis_doc(a.kinetic_flux),
            "kinetic_flux_orthocomplement": _basis_doc(a.orthocomplement),
        },
        "kinetic_deficiency": a.kinetic_deficiency,
        "classification": cls,
        "verdict": a.verdict.verdict.value,
        "evidence": _evidence_doc(a.verdict.evidence, net),
        "trail": list(a.verdict.trail),
        "acr": a.acr,
        "decomposition": {
            "subnetworks": a.decomposition.labels(net),
            "independent": a.decomposition.independent,
            "deficiencies": [i.delta for i in a.decomposition.indices],
            "verdicts": [{"index": v.index, "verdict": v.verdict.value, "rule": v.rule} for v in a.subnetwork_verdicts],
        },
        "positive_equilibrium_exists": a.existence,
    }


def _fmt(q) -> str:
    if q is None:
        return "undefined"
    return str(Fraction(q))


def text_report(a: Analysis) -> str:
    """Human-readable summary laid out as property : value rows."""
    net = a.network
    ix = a.indices
    c = a.classification
    rows = [
        ("Species", " ".join(net.species_names)),
        ("Complexes / linkage / rank", f"n={ix.n}  l={ix.l}  s={ix.s}"),
        ("Deficiency", str(ix.delta)),
        ("Weakly reversible", "yes" if a.weakly_reversible else "no"),
        ("Conservative", "yes" if a.conservative else "no"),
        ("PL-RDK", "yes" if a.pl_rdk else "no"),
        ("Kinetic deficiency", "n/a" if a.kinetic_deficiency is None else str(a.kinetic_deficiency)),
    ]
    if c is not None:
        rows += [
            ("Class", c.label.value),
            ("Rp", _fmt(c.Rp)),
            ("Rq", _fmt(c.Rq)),
        ]
    rows += [
        ("Positive steady state", {True: "exists", False: "none", None: "unknown"}[a.existence]),
        ("Multistationarity", a.verdict.verdict.value),
        ("Evidence", _evidence_doc(a.verdict.evidence, net)["kind"]),
        ("ACR species", "n/a" if a.acr is None else (", ".join(a.acr) or "none")),
        ("Decomposition", " | ".join("{" + ",".join(b) + "}" for b in a.decomposition.labels(net))
         + ("  (independent)" if a.decomposition.independent else "")),
    ]
    width = max(len(k) for k, _ in rows)
    out = [f"{k.ljust(width)}  {v}" for k, v in rows]
    for step in a.verdict.trail:
        out.append(f"{'':{width}}  - {step}")
    return "\n".join(out) + "\n"
