"""Explainable outlier detection from closure sizes in agenda-restricted formal contexts."""

__version__ = "0.1.0"

from .agendas import (
    Agenda,
    AgendaSpace,
    FuzzyAgenda,
    adaptive_search,
    expert_agendas,
    normalize,
    read_agenda_file,
    small_agendas,
)
from .context import (
    FormalContext,
    build_context,
    closure_size,
    closure_size_matrix,
    closure_sizes_all,
    full_mask,
    mask_from_indices,
    query_intent,
)
from .explain import explain_global, explain_local, export_heatmap, export_histogram
from .metrics import Split, roc_auc, stratified_split, tpr_fpr
from .model_io import load_model, save_model
from .pipeline import evaluate, fit_on_split
from .scaling import DataTable, Scaler, bin_index, binarize, fit_scaler, read_csv
from .sup import (
    SupModel,
    TrainConfig,
    compute_bal,
    fit_sup,
    loss,
    loss_gradient,
    predict_sup,
    train,
    weighted_score,
)
from .unsup import DegreeMatrix, UnsupModel, degree, degree_matrix, fit_unsup, score_unsup
