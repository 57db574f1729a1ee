"""Max-Cut QAOA warm-starting: simulation, datasets, angle-predicting networks, benchmarks."""

from ._kernels import backend
from .graphs import (
    Graph,
    degree_histogram,
    generate_corpus,
    generate_regular_graph,
    parse_graph_text,
    read_graph_file,
    serialize_graph,
    size_histogram,
    write_graph_file,
)
from .maxcut import CutSolution, brute_force_maxcut, cut_value
from .simulator import (
    OptimizationTrace,
    QaoaParams,
    StateVector,
    apply_mixer_layer,
    apply_phase_layer,
    approximation_ratio,
    cost_vector,
    expectation,
    fold_params,
    most_likely_cut,
    optimize_params,
    qaoa_state,
    random_init,
    uniform_state,
    wrap_canonical,
)
from .dataset import (
    DatasetRecord,
    build_dataset,
    build_record,
    fixed_angle_lookup,
    load_fixed_angle_table,
    node_features,
    prune,
    read_records,
    record_from_params,
    split,
    write_records,
)
from .gnn import (
    GnnModel,
    TrainConfig,
    init_model,
    load_model,
    mse_loss,
    predict_params,
    save_model,
    train,
)
from .bench import (
    EvalReport,
    evaluate,
    improvement_metric,
    load_report,
    save_report,
    write_report_files,
)

__version__ = "0.1.0"
