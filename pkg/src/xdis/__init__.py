"""xdis: quantify and mitigate disagreement between sentence-level
feature-attribution explanations of summarization models.

The package covers corpus cleaning and sentence spans, attribution ingestion
and aggregation, four rank-agreement metrics, semantic segmentation via
k-means with silhouette-based model selection, whole-corpus analysis runs,
and export of reports and visualization payloads.
"""

from .agreement import (
    AgreementMatrix,
    agreement_matrix,
    feature_agreement,
    pairwise_rank_agreement,
    rank_agreement,
    spearman_rank_correlation,
    top_features,
)
from .attribution import (
    AttributionStore,
    Explanation,
    TokenAttribution,
    aggregate_spans,
    import_attributions,
    normalize_minmax,
    slice_to_segment,
)
from .corpus import (
    CleanArticle,
    Protection,
    RawArticle,
    SentenceSpan,
    TokenBudget,
    clean_article,
    load_corpus,
    preprocess_text,
    restore_protected,
    split_sentences,
    truncate_to_budget,
)
from .pipeline import (
    AnalysisConfig,
    Report,
    VizPayload,
    compare_reports,
    export_report,
    export_viz_payload,
    load_report,
    run_global_analysis,
    run_regional_analysis,
)
from .segmentation import (
    ClusterAssignment,
    EmbeddingSet,
    KSelection,
    SegmentationResult,
    average_optimal_k,
    kmeans_cluster,
    lexical_fallback_embed,
    load_embeddings,
    segment_article,
    select_optimal_k,
    silhouette_score,
)

__version__ = "0.1.0"
