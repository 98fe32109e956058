"""Constructors for the gm-C filter topologies, each returning a TopologyBundle.

Every constructor builds two independent artifacts from the same element
values: the small-signal netlist (solved numerically by the nodal-analysis
oracle) and the closed-form transfer function of each probed node. Tests and
the verify command check the two against each other.

Conventions:
  - supplies are AC ground, so transistor drains tied to VDD sink into node 0;
  - differential circuits are modeled by their half-circuit equivalent with
    half-circuit capacitor values (the schematic's C/2 pair merges into C);
  - negative-sign transfer functions stay signed, magnitude tests use abs();
  - body-effect transconductance is fixed at zero and not exposed.
"""

from __future__ import annotations

import json
import math
import warnings

from .errors import InfiniteLoopGainError, InvalidParameterError, UnstableConfigurationWarning
from .netlist import Capacitor, Conductance, GmCNetlist, TopologyBundle, Transconductor
from .tf import Polynomial, RationalTF, _require_positive

GND = 0


class ApproximationRegimeWarning(UserWarning):
    """Element ratios are outside the regime where the closed form is valid."""


def _tf(num, den) -> RationalTF:
    return RationalTF(Polynomial(num), Polynomial(den))


def _check_variant(variant: str) -> str:
    if variant not in ("I", "II"):
        raise InvalidParameterError(f"variant must be 'I' or 'II', got {variant!r}")
    return variant


def make_sf_lpf(gm1: float, c1: float, gds1: float = 0.0, gdsb: float = 0.0) -> TopologyBundle:
    """Source-follower first-order LPF, with optional finite output conductances.

    OUT: gm1/(gm1+gds1+gdsb) * 1/(1 + s*C1/(gm1+gds1+gdsb)); the leading factor
    is the closed-loop DC gain of the follower's local feedback and equals 1
    when gds1 = gdsb = 0.
    """
    _require_positive(gm1=gm1, c1=c1)
    if gds1 < 0 or gdsb < 0:
        raise InvalidParameterError("gds1 and gdsb must be >= 0")
    g_total = gm1 + gds1 + gdsb

    IN, OUT = 1, 2
    conductances = []
    if gds1 > 0:
        conductances.append(Conductance(OUT, GND, gds1))
    if gdsb > 0:
        conductances.append(Conductance(OUT, GND, gdsb))
    netlist = GmCNetlist(
        node_count=3,
        transconductors=(Transconductor(IN, OUT, OUT, GND, gm1),),
        capacitors=(Capacitor(OUT, GND, c1),),
        conductances=tuple(conductances),
        input_node=IN,
        probes={"OUT": OUT},
    )
    closed = {"OUT": _tf([gm1], [g_total, c1])}
    return TopologyBundle(
        name="sf",
        netlist=netlist,
        closed_forms=closed,
        params={"topology": "sf", "variant": None,
                "elements": {"gm1": gm1, "c1": c1, "gds1": gds1, "gdsb": gdsb}},
        omega0=g_total / c1,
        q=None,
    )


def sf_loop_gain(gm1: float, gds1: float, gdsb: float) -> float:
    """DC loop gain T0 = gm1/(gds1+gdsb) of the follower's local feedback.

    The follower's DC closed-loop gain is T0/(1+T0), which approaches 1 for
    T0 >> 1.
    """
    _require_positive(gm1=gm1)
    if gds1 < 0 or gdsb < 0:
        raise InvalidParameterError("gds1 and gdsb must be >= 0")
    if gds1 + gdsb == 0:
        raise InfiniteLoopGainError("gds1 + gdsb = 0 gives unbounded DC loop gain")
    return gm1 / (gds1 + gdsb)


def _flag_stability(name: str, s_coeff: float) -> str | None:
    if s_coeff <= 0:
        msg = (f"{name}: damping coefficient {s_coeff:.6g} <= 0, poles are not in "
               "the left half-plane (positive feedback exceeds loss)")
        warnings.warn(msg, UnstableConfigurationWarning, stacklevel=3)
        return msg
    return None


def make_ota_lpf(gm1: float, gm2: float, gm3: float, c1: float, c2: float) -> TopologyBundle:
    """Two cascaded OTA integrators with a gm3 positive-feedback OTA.

    LPF: (gm1*gm2/C1C2) / (s^2 + s(gm1/C1 - gm3/C1 + gm2/C2) + gm1*gm2/C1C2).
    gm3 cancels the first integrator's loss at gm1 = gm3, turning the cascade
    into the lossless-first loop; gm3 = 0 is the plain lossy cascade (Q <= 0.5)
    and drops the element from the netlist. X is the inter-integrator node.
    """
    _require_positive(gm1=gm1, gm2=gm2, c1=c1, c2=c2)
    if gm3 < 0:
        raise InvalidParameterError("gm3 must be >= 0")
    IN, X, LPF = 1, 2, 3
    elements = [
        Transconductor(IN, X, X, GND, gm1),
        Transconductor(X, LPF, LPF, GND, gm2),
    ]
    if gm3 > 0:
        elements.append(Transconductor(X, LPF, X, GND, gm3))
    netlist = GmCNetlist(
        node_count=4,
        transconductors=tuple(elements),
        capacitors=(Capacitor(X, GND, c1), Capacitor(LPF, GND, c2)),
        conductances=(),
        input_node=IN,
        probes={"LPF": LPF, "X": X},
    )
    w0sq = gm1 * gm2 / (c1 * c2)
    s_coeff = gm1 / c1 - gm3 / c1 + gm2 / c2
    den = [w0sq, s_coeff, 1.0]
    closed = {
        "LPF": _tf([w0sq], den),
        # X = LPF * (1 + s*C2/gm2)
        "X": _tf([w0sq, gm1 / c1], den),
    }
    omega0 = math.sqrt(w0sq)
    return TopologyBundle(
        name="ota-lpf",
        netlist=netlist,
        closed_forms=closed,
        params={"topology": "ota-lpf", "variant": None,
                "elements": {"gm1": gm1, "gm2": gm2, "gm3": gm3, "c1": c1, "c2": c2}},
        omega0=omega0,
        q=omega0 / s_coeff if s_coeff != 0 else math.inf,
        stability_warning=_flag_stability("ota-lpf", s_coeff),
    )


def make_ota_bpf(
    gm1: float, gm2: float, gm3: float, c1: float, c2: float,
    gm4: float, gm5: float, c_par: float,
) -> TopologyBundle:
    """OTA LPF plus an open-loop differential buffer subtracting X - LPF.

    BPF: s*(gm1/C1)/den(s) * gm4/(gm5 + s*C_par). The buffer pole gm5/C_par is
    explicit in both the netlist and the closed form; ota_bpf_ideal_tf() gives
    the wide-buffer-bandwidth idealization.
    """
    _require_positive(gm1=gm1, gm2=gm2, c1=c1, c2=c2,
                      gm4=gm4, gm5=gm5, c_par=c_par)
    if gm3 < 0:
        raise InvalidParameterError("gm3 must be >= 0")
    IN, X, LPF, BUF = 1, 2, 3, 4
    elements = [
        Transconductor(IN, X, X, GND, gm1),
        Transconductor(X, LPF, LPF, GND, gm2),
        Transconductor(X, LPF, BUF, GND, gm4),
        Transconductor(GND, BUF, BUF, GND, gm5),
    ]
    if gm3 > 0:
        elements.append(Transconductor(X, LPF, X, GND, gm3))
    netlist = GmCNetlist(
        node_count=5,
        transconductors=tuple(elements),
        capacitors=(
            Capacitor(X, GND, c1),
            Capacitor(LPF, GND, c2),
            Capacitor(BUF, GND, c_par),
        ),
        conductances=(),
        input_node=IN,
        probes={"LPF": LPF, "X": X, "BPF": BUF},
    )
    w0sq = gm1 * gm2 / (c1 * c2)
    s_coeff = gm1 / c1 - gm3 / c1 + gm2 / c2
    den = Polynomial([w0sq, s_coeff, 1.0])
    buf_den = Polynomial([gm5, c_par])
    closed = {
        "LPF": RationalTF(Polynomial([w0sq]), den),
        "X": RationalTF(Polynomial([w0sq, gm1 / c1]), den),
        "BPF": RationalTF(Polynomial([0.0, gm1 * gm4 / c1]), den.mul(buf_den)),
    }
    omega0 = math.sqrt(w0sq)
    return TopologyBundle(
        name="ota-bpf",
        netlist=netlist,
        closed_forms=closed,
        params={"topology": "ota-bpf", "variant": None,
                "elements": {"gm1": gm1, "gm2": gm2, "gm3": gm3, "c1": c1, "c2": c2,
                             "gm4": gm4, "gm5": gm5, "c_par": c_par}},
        omega0=omega0,
        q=omega0 / s_coeff if s_coeff != 0 else math.inf,
        stability_warning=_flag_stability("ota-bpf", s_coeff),
    )


def ota_bpf_ideal_tf(gm1: float, gm2: float, gm3: float, c1: float, c2: float) -> RationalTF:
    """The buffer-free band-pass idealization s*(gm1/C1)/den(s)."""
    _require_positive(gm1=gm1, gm2=gm2, c1=c1, c2=c2)
    if gm3 < 0:
        raise InvalidParameterError("gm3 must be >= 0")
    w0sq = gm1 * gm2 / (c1 * c2)
    return _tf([0.0, gm1 / c1], [w0sq, gm1 / c1 - gm3 / c1 + gm2 / c2, 1.0])


def make_ccia_bpf(gm1: float, gm2: float, c1: float, c2: float, c_f: float) -> TopologyBundle:
    """Capacitively-coupled amplifier band-pass with a gm2 DC-servo loop.

    BPF (for C_F -> 0): -s*(gm1/C2) / (s^2 + s*gm2/C1 + gm1*gm2/C1C2). The
    feedback capacitor C_F stays in the netlist so the oracle exposes the
    approximation error; valid regime is C1, C2 >> C_F.
    """
    _require_positive(gm1=gm1, gm2=gm2, c1=c1, c2=c2, c_f=c_f)
    if min(c1, c2) / c_f < 10.0:
        warnings.warn(
            f"ccia-bpf closed form assumes C1, C2 >> C_F; got min(C1,C2)/C_F = "
            f"{min(c1, c2) / c_f:.3g}",
            ApproximationRegimeWarning,
            stacklevel=2,
        )
    IN, Z, BPF = 1, 2, 3
    netlist = GmCNetlist(
        node_count=4,
        transconductors=(
            Transconductor(GND, Z, BPF, GND, gm1),
            Transconductor(BPF, Z, Z, GND, gm2),
        ),
        capacitors=(
            Capacitor(IN, Z, c1),
            Capacitor(Z, BPF, c_f),
            Capacitor(BPF, GND, c2),
        ),
        conductances=(),
        input_node=IN,
        probes={"BPF": BPF, "Z": Z},
    )
    w0sq = gm1 * gm2 / (c1 * c2)
    den = [w0sq, gm2 / c1, 1.0]
    closed = {"BPF": _tf([0.0, -gm1 / c2], den)}
    return TopologyBundle(
        name="ccia-bpf",
        netlist=netlist,
        closed_forms=closed,
        params={"topology": "ccia-bpf", "variant": None,
                "elements": {"gm1": gm1, "gm2": gm2, "c1": c1, "c2": c2, "c_f": c_f}},
        omega0=math.sqrt(w0sq),
        q=math.sqrt(gm1 * c1 / (gm2 * c2)),
    )


def make_xsf(gm1: float, gm2: float, c1: float, c2: float) -> TopologyBundle:
    """Cross-coupled source-follower second-order LPF (half-circuit model).

    Two stacked followers whose cross-coupling feeds gm2's current back into
    the first stage, cancelling its loss:
    LPF: (gm1*gm2/C1C2) / (s^2 + s(gm1/C1 - gm2/C1 + gm2/C2) + gm1*gm2/C1C2).
    X is the inter-follower node; GmX probes gm2's output current, a band-pass
    transconductance gm2*(H_X - H_LPF) peaking at Q^2 * gm2.
    """
    _require_positive(gm1=gm1, gm2=gm2, c1=c1, c2=c2)
    IN, X, LPF = 1, 2, 3
    netlist = GmCNetlist(
        node_count=4,
        transconductors=(
            Transconductor(IN, X, X, GND, gm1),
            Transconductor(X, LPF, LPF, GND, gm2),   # follower M2
            Transconductor(X, LPF, X, GND, gm2),     # cross-coupled feedback
        ),
        capacitors=(Capacitor(X, GND, c1), Capacitor(LPF, GND, c2)),
        conductances=(),
        input_node=IN,
        probes={"LPF": LPF, "X": X},
        current_probes={"GmX": 1},
    )
    w0sq = gm1 * gm2 / (c1 * c2)
    s_coeff = gm1 / c1 - gm2 / c1 + gm2 / c2
    den = [w0sq, s_coeff, 1.0]
    closed = {
        "LPF": _tf([w0sq], den),
        "X": _tf([w0sq, gm1 / c1], den),
        # gm2 * (H_X - H_LPF) = s * gm1*gm2/C1 / den
        "GmX": _tf([0.0, gm1 * gm2 / c1], den),
    }
    omega0 = math.sqrt(w0sq)
    return TopologyBundle(
        name="xsf",
        netlist=netlist,
        closed_forms=closed,
        params={"topology": "xsf", "variant": None,
                "elements": {"gm1": gm1, "gm2": gm2, "c1": c1, "c2": c2}},
        omega0=omega0,
        q=omega0 / s_coeff if s_coeff != 0 else math.inf,
        stability_warning=_flag_stability("xsf", s_coeff),
    )


def make_xsf_bpf(
    gm1: float, gm2: float, gm3: float, c_in: float, c_f: float, c_l: float
) -> TopologyBundle:
    """Cross-coupled follower LPF with a capacitive-feedback subtractor stage.

    The filter runs with C1 = C2 = C_IN so the subtractor's input capacitors
    double as the filter capacitors, terminated at the amplifier's virtual
    ground. Both differential halves are modeled (the complementary half is
    driven through input-inverted transconductors); one half's X node and the
    other half's LPF node couple into the virtual ground Z, and the amplifier
    (gm3, feedback C_F, load C_L) closes the loop.

    BPF (wide amplifier bandwidth): (C_IN/C_F) * s*(gm1/C_IN) /
    (s^2 + s*gm1/C_IN + gm1*gm2/C_IN^2). The amplifier bandwidth is reduced
    from gm3/C_L by the feedback factor C_F/(2*C_IN + C_F), observable in the
    oracle at finite gm3/C_L.
    """
    _require_positive(gm1=gm1, gm2=gm2, gm3=gm3, c_in=c_in, c_f=c_f, c_l=c_l)
    IN, XP, LPFP, XN, LPFN, Z, B = 1, 2, 3, 4, 5, 6, 7
    netlist = GmCNetlist(
        node_count=8,
        transconductors=(
            # positive half
            Transconductor(IN, XP, XP, GND, gm1),
            Transconductor(XP, LPFP, LPFP, GND, gm2),
            Transconductor(XP, LPFP, XP, GND, gm2),
            # negative half: drive is -gm1*(v_in + v_xn), split into two elements
            Transconductor(GND, XN, XN, GND, gm1),
            Transconductor(GND, IN, XN, GND, gm1),
            Transconductor(XN, LPFN, LPFN, GND, gm2),
            Transconductor(XN, LPFN, XN, GND, gm2),
            # subtractor amplifier
            Transconductor(GND, Z, B, GND, gm3),
        ),
        capacitors=(
            Capacitor(XP, GND, c_in),
            Capacitor(LPFP, Z, c_in),
            Capacitor(XN, Z, c_in),
            Capacitor(LPFN, GND, c_in),
            Capacitor(Z, B, c_f),
            Capacitor(B, GND, c_l),
        ),
        conductances=(),
        input_node=IN,
        probes={"BPF": B, "LPF": LPFP, "X": XP, "VG": Z, "LPF_DIFF": (LPFP, LPFN)},
    )
    w0sq = gm1 * gm2 / (c_in * c_in)
    den = [w0sq, gm1 / c_in, 1.0]
    closed = {
        "BPF": _tf([0.0, gm1 / c_f], den),
        "LPF": _tf([w0sq], den),
        "X": _tf([w0sq, gm1 / c_in], den),
        "LPF_DIFF": _tf([2.0 * w0sq], den),
    }
    return TopologyBundle(
        name="xsf-bpf",
        netlist=netlist,
        closed_forms=closed,
        params={"topology": "xsf-bpf", "variant": None,
                "elements": {"gm1": gm1, "gm2": gm2, "gm3": gm3,
                             "c_in": c_in, "c_f": c_f, "c_l": c_l}},
        omega0=math.sqrt(gm1 * gm2) / c_in,
        q=math.sqrt(gm2 / gm1),
    )


def _ssf_fvf(name: str, variant: str, gm1, gm2, c1, c2, fvf: bool) -> TopologyBundle:
    _check_variant(variant)
    _require_positive(gm1=gm1, gm2=gm2, c1=c1, c2=c2)
    w0sq = gm1 * gm2 / (c1 * c2)

    if variant == "I":
        # C1 bootstraps BPF on top of LPF; gm1's current is trapped in the
        # M1-C1 loop, gm2 senses BPF and discharges C2.
        IN, BPF, LPF = 1, 2, 3
        if fvf:
            gm2_el = Transconductor(BPF, GND, GND, LPF, gm2)
        else:
            gm2_el = Transconductor(GND, BPF, LPF, GND, gm2)
        netlist = GmCNetlist(
            node_count=4,
            transconductors=(Transconductor(IN, LPF, LPF, BPF, gm1), gm2_el),
            capacitors=(Capacitor(BPF, LPF, c1), Capacitor(LPF, GND, c2)),
            conductances=(),
            input_node=IN,
            probes={"BPF": BPF, "LPF": LPF},
        )
        den = [w0sq, gm2 / c2, 1.0]
        closed = {
            "BPF": _tf([0.0, -gm1 / c1], den),
            "LPF": _tf([w0sq], den),
        }
        q = math.sqrt(gm1 * c2 / (gm2 * c1))
    else:
        # C1 is grounded; the gm1 feedforward path cancels the lossy numerator
        # term, leaving a clean band-pass at BPF. Z is first-order low-pass.
        IN, BPF, Z = 1, 2, 3
        if fvf:
            gm2_el = Transconductor(BPF, GND, GND, Z, gm2)
        else:
            gm2_el = Transconductor(GND, BPF, Z, GND, gm2)
        netlist = GmCNetlist(
            node_count=4,
            transconductors=(Transconductor(IN, Z, Z, BPF, gm1), gm2_el),
            capacitors=(Capacitor(BPF, GND, c1), Capacitor(Z, GND, c2)),
            conductances=(),
            input_node=IN,
            probes={"BPF": BPF, "Z": Z},
        )
        den = [w0sq, gm1 / c2, 1.0]
        closed = {
            "BPF": _tf([0.0, -gm1 / c1], den),
            "Z": _tf([w0sq, gm1 / c2], den),
        }
        q = math.sqrt(gm2 * c2 / (gm1 * c1))

    return TopologyBundle(
        name=name,
        netlist=netlist,
        closed_forms=closed,
        params={"topology": name, "variant": variant,
                "elements": {"gm1": gm1, "gm2": gm2, "c1": c1, "c2": c2}},
        omega0=math.sqrt(w0sq),
        q=q,
    )


def make_ssf(variant: str, gm1: float, gm2: float, c1: float, c2: float) -> TopologyBundle:
    """Super-source-follower biquad, type I or II.

    Type I:  BPF = -s*(gm1/C1)/(s^2 + s*gm2/C2 + w0^2), LPF also available.
    Type II: BPF = -s*(gm1/C1)/(s^2 + s*gm1/C2 + w0^2); the remaining node Z
    is (gm1/C1C2)(gm2 + s*C1)/den, effectively first-order low-pass.
    """
    return _ssf_fvf("ssf", variant, gm1, gm2, c1, c2, fvf=False)


def make_fvf(variant: str, gm1: float, gm2: float, c1: float, c2: float) -> TopologyBundle:
    """Flipped-voltage-follower biquad, type I or II.

    Same transfer functions as the super source follower of the same type; the
    netlist differs only in the orientation of the gm2 element (opposite input
    polarity with the output current direction flipped to match).
    """
    return _ssf_fvf("fvf", variant, gm1, gm2, c1, c2, fvf=True)


# ---------------------------------------------------------------------------
# Dispatch, parameter records, and element presets with the published values.

TOPOLOGIES = ("sf", "ota-lpf", "ota-bpf", "ccia-bpf", "xsf", "xsf-bpf", "ssf", "fvf")

_CONSTRUCTORS = {
    "sf": make_sf_lpf,
    "ota-lpf": make_ota_lpf,
    "ota-bpf": make_ota_bpf,
    "ccia-bpf": make_ccia_bpf,
    "xsf": make_xsf,
    "xsf-bpf": make_xsf_bpf,
}


def build(topology: str, variant: str | None = None, **elements: float) -> TopologyBundle:
    """Construct any topology by name; ssf/fvf require variant 'I' or 'II'."""
    if topology in ("ssf", "fvf"):
        if variant is None:
            raise InvalidParameterError(f"{topology} requires variant 'I' or 'II'")
        maker = make_ssf if topology == "ssf" else make_fvf
        return maker(variant, **elements)
    if topology not in _CONSTRUCTORS:
        raise InvalidParameterError(
            f"unknown topology {topology!r}; expected one of {TOPOLOGIES}"
        )
    if variant is not None:
        raise InvalidParameterError(f"{topology} does not take a variant")
    return _CONSTRUCTORS[topology](**elements)


def params_to_json(params: dict) -> str:
    return json.dumps(params, indent=2, sort_keys=True) + "\n"


def params_from_json(text: str) -> dict:
    doc = json.loads(text)
    for key in ("topology", "elements"):
        if key not in doc:
            raise InvalidParameterError(f"parameter record is missing {key!r}")
    return {"topology": doc["topology"], "variant": doc.get("variant"),
            "elements": dict(doc["elements"])}


def build_from_params(params: dict) -> TopologyBundle:
    return build(params["topology"], params.get("variant"), **params["elements"])


# Published element values for the follower filters; the OTA/CCIA circuits get
# matching Q=2, f0=10.07 kHz sets. Parasitic elements sit at idealized limits
# so the closed forms and the oracle agree tightly.
_GM = 253.2e-9

PAPER_PRESETS: dict[str, dict] = {
    "sf": {"topology": "sf", "variant": None,
           "elements": {"gm1": _GM, "c1": 2e-12, "gds1": 0.0, "gdsb": 0.0}},
    "ota-lpf": {"topology": "ota-lpf", "variant": None,
                "elements": {"gm1": _GM, "gm2": _GM, "gm3": _GM, "c1": 2e-12, "c2": 8e-12}},
    "ota-bpf": {"topology": "ota-bpf", "variant": None,
                "elements": {"gm1": _GM, "gm2": _GM, "gm3": _GM, "c1": 2e-12, "c2": 8e-12,
                             "gm4": _GM, "gm5": _GM, "c_par": 4e-18}},
    "ccia-bpf": {"topology": "ccia-bpf", "variant": None,
                 "elements": {"gm1": _GM, "gm2": _GM, "c1": 8e-12, "c2": 2e-12, "c_f": 1e-24}},
    "xsf": {"topology": "xsf", "variant": None,
            "elements": {"gm1": _GM, "gm2": _GM, "c1": 2e-12, "c2": 8e-12}},
    "xsf-bpf": {"topology": "xsf-bpf", "variant": None,
                "elements": {"gm1": _GM, "gm2": _GM, "gm3": 1e4,
                             "c_in": 2e-12, "c_f": 2e-13, "c_l": 1e-22}},
    "ssf-i": {"topology": "ssf", "variant": "I",
              "elements": {"gm1": 252.8e-9, "gm2": 227.3e-9, "c1": 1e-12, "c2": 4e-12}},
    "ssf-ii": {"topology": "ssf", "variant": "II",
               "elements": {"gm1": 252.8e-9, "gm2": 227.3e-9, "c1": 1e-12, "c2": 4e-12}},
    "fvf-i": {"topology": "fvf", "variant": "I",
              "elements": {"gm1": 262.4e-9, "gm2": 262.5e-9, "c1": 1e-12, "c2": 4e-12}},
    "fvf-ii": {"topology": "fvf", "variant": "II",
               "elements": {"gm1": 262.4e-9, "gm2": 262.5e-9, "c1": 1e-12, "c2": 4e-12}},
}


def paper_bundle(preset: str) -> TopologyBundle:
    if preset not in PAPER_PRESETS:
        raise InvalidParameterError(
            f"unknown preset {preset!r}; expected one of {sorted(PAPER_PRESETS)}"
        )
    return build_from_params(PAPER_PRESETS[preset])
