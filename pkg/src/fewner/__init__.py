"""Few-shot named-entity recognition by structured nearest-neighbor inference."""

from .corpus import (
    EntitySpan,
    OUTSIDE,
    ParseError,
    TagLabel,
    TagScheme,
    TagSet,
    TaggedSentence,
    compute_tag_set,
    parse_conll,
    remap_for_extension,
    render_conll,
    to_io,
    to_spans,
)
from .decode import DecodingConfig, viterbi, viterbi_path
from .embed import EmbeddingTable, hash_featurize, l2_normalize, load_embeddings, write_embeddings
from .experiment import ExperimentConfig, parse_config, run_experiment, run_predict
from .knn import (
    EmissionRow,
    SupportIndex,
    build_support_index,
    class_distances,
    emission_rows,
    emissions,
    nearest_tag,
    nnshot_predict,
    sq_euclidean,
)
from .metrics import AggregateReport, EvalReport, aggregate, span_micro_f1
from .sampler import Episode, SupportSet, build_episode, greedy_sample
from .transitions import (
    AbstractTransitions,
    ExpandedTransitions,
    TransitionCounts,
    apply_temperature,
    count_abstract,
    estimate_abstract,
    expand,
    uniform_transitions,
)

__version__ = "0.1.0"
