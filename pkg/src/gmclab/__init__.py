"""gm-C filter toolkit: biquad transfer functions, small-signal netlists with
an independent nodal-analysis oracle, and a band-pass filter-bank audio front
end."""

from .analysis import (
    DEFAULT_GRID,
    FrequencyGrid,
    FrequencyResponse,
    PeakEstimate,
    ResponseMetrics,
    center_frequency,
    compare,
    peak,
    q_from_bandwidth,
    rolloff,
    summarize,
    sweep_netlist,
    sweep_tf,
)
from .filterbank import (
    DiscreteBiquad,
    EnvelopeConfig,
    FeatureMatrix,
    FilterBankSpec,
    build_discrete_bank,
    design_bank,
    discretize,
    filter_outputs,
    read_wav,
    run_bank,
)
from .mna import ComplexMatrixSystem, SolveOptions, response, solve, solve_at, stamp
from .netlist import Capacitor, Conductance, GmCNetlist, TopologyBundle, Transconductor
from .tf import (
    BiquadKind,
    BiquadParams,
    Polynomial,
    RationalTF,
    biquad_bpf_equal_poles,
    biquad_lpf,
    cascaded_lossy,
    first_order_lpf,
    hx_equal_poles,
    mul,
    poles,
    scale,
    sub,
    two_pole_bpf,
    two_pole_hx,
    two_pole_lpf,
    two_pole_q,
)
from .topologies import (
    PAPER_PRESETS,
    TOPOLOGIES,
    build,
    build_from_params,
    make_ccia_bpf,
    make_fvf,
    make_ota_bpf,
    make_ota_lpf,
    make_sf_lpf,
    make_ssf,
    make_xsf,
    make_xsf_bpf,
    ota_bpf_ideal_tf,
    paper_bundle,
    params_from_json,
    params_to_json,
    sf_loop_gain,
)

__version__ = "0.1.0"
