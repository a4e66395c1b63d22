"""Two collaborating PMCW automotive radars: simulation, phase-alignment
weighting that turns cross-path interference constructive, range-Doppler
processing, and Monte Carlo detection evaluation."""

__version__ = "0.1.0"

from .codes import (Code, CodeError, CorrelationReport, correlation_values,
                    cross_correlate, generate_code, ideal_orthogonal_pair,
                    load_code_csv, save_code_csv, zcz_length)
from .scene import (ChannelParams, RadarNode, Scene, SceneError, Target,
                    WaveformParams, derive_channel, path_gains)
from .align import (AlignmentError, AlignmentProblem, WeightMatrix,
                    apply_weight, imag_residual, load_weight_csv,
                    save_weight_csv, solve_alignment_closed_form,
                    solve_alignment_iterative)
from .synth import (DataCube, SynthesisError, add_noise, combine_cubes,
                    save_cube_csv, synthesize_cross_echo, synthesize_self_echo)
from .rdproc import (ProcessingError, RangeDopplerMap, RangeProfileMatrix,
                     correlate_fast_time, cut_sidelobe_db, doppler_dft,
                     fuse_noncoherent, peak_sidelobe_level, save_map_csv,
                     save_map_pgm)
from .protocol import (CpiResult, CpiSchedule, ProtocolError, PulseAction,
                       SideChannel, channel_payload_size,
                       collaborative_schedule, noncooperative_schedule,
                       raw_cube_payload_size, run_cpi)
from .evaluate import (Detection, EvaluationError, HitRateCurve,
                       extract_peaks, process_baseline, process_enhanced,
                       run_hit_rate_sweep, run_psl_experiment, score_hits)
from .config import (ConfigError, ExperimentConfig, SolverOptions,
                     load_config, parse_config)
