"""Quantized linear systems on integer lattices.

Library layout:
  lattice       fragments, averages, frequencies, trigonometric averages
  geometry      boxes, Jordan sets, cells, quantizers, cell moments
  quasiperiodic quasiperiodic lattice sets, power stacks, resonance search
  dynamics      the quantized system, orbits, preimages, companion system
  analysis      statistical verification harness and experiment drivers
  files         text formats for cells, systems and quasiperiodic sets
  imaging       fragment membership maps as portable greymaps
  cli           command-line front end
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .lattice import (
    Fragment,
    FrequencyEstimate,
    SweepResult,
    average,
    centered_sweep,
    fragment_grid,
    fragment_points,
    frequency,
    frequency_sweep,
    trig_average,
    trig_average_direct,
    weyl_bound,
)
from .geometry import (
    Box,
    Cell,
    CellError,
    JordanSet,
    Quantizer,
    cell_build,
    cell_covariance,
    cell_mean,
    cell_translate,
    compensating_quantizer,
    cross_cell,
    jordan_from_boxes,
    roundoff_cell,
    roundoff_quantizer,
    unit_cube_cell,
)
from .quasiperiodic import (
    PowerStack,
    QuasiperiodicSet,
    fragment_frequency,
    power_stack,
    resonance_search,
    slab_window,
    stack_event,
    theoretical_frequency,
)
from .dynamics import (
    FiniteLatticeSet,
    QuantizedSystem,
    TrajectoryRecord,
    basin,
    cardinalities,
    compensating_step,
    error,
    identity_system,
    preimage,
    preimage_count_scan,
    rotation_matrix,
    rotation_system,
    rotation_system_exact,
    sigma,
    step,
    step_points,
    supporting_inverse,
    supporting_step,
    trajectory,
)
from .analysis import (
    KernelEstimate,
    NeutralSpec,
    TestReport,
    clt_experiment,
    error_independence_test,
    error_uniformity_test,
    frequency_preservation_gap,
    hole_frequency_2d,
    kernel_estimate,
    martingale_check,
    max_deviation_experiment,
    mixing_test,
    neutral_build,
    neutral_spec_for,
    phi_partial,
    reachability_frequency,
    reachability_mc,
    wiener_max_modulus_sample,
)

__version__ = "0.1.0"
