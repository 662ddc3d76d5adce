"""Desk-scale radar gesture recognition with spiking and recurrent heads."""

__version__ = "0.1.0"

from .scene_sim import (
    C,
    ChirpConfig,
    GestureScript,
    PointTarget,
    RawRecording,
    build_dataset,
    gen_gesture_script,
    render_script,
    synth_beat_signal,
)
from .radar_dsp import (
    RdSequence,
    compute_rd_map,
    preprocess_sequence,
    range_resolution,
    remove_static_clutter,
    slice_frames,
    velocity_resolution,
)
from .augment import AugmentParams, augment_sequence
from .snn_engine import (
    LifLayer,
    SpikeRecord,
    lif_step,
    predict_from_prefix,
    soft_spike,
    spike_rate_loss,
    surrogate_spike_grad,
)
from .models import (
    ModelSpec,
    SequenceClassifier,
    TrainConfig,
    build_model,
    infer,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .pruning import PruneSchedule, apply_magnitude_prune, prune_and_finetune, sparsity_at
from .complexity import ComplexityReport, count_eflops, count_flops, profile_model
from .evaluation import accuracy, confusion, latency_curve, macro_f1, repeat_runs
