"""Bounded intent-to-UI engine.

Natural-language portal intents become schema-validated compositions over
a vetted component catalog; a deterministic renderer lowers them to HTML;
a mixed evaluation harness scores the result with weighted automatic
metrics and rubric judgments.
"""

from .composition import (
    Composition,
    ComponentSpec,
    DataBinding,
    RepairAction,
    ValidationReport,
    Violation,
    canonicalize,
    canonical_prop_string,
    composition_from_dict,
    composition_from_json,
    fill_defaults,
    repair,
    validate,
)
from .errors import (
    DepthExceededError,
    DomainError,
    EmptyInputError,
    EndpointError,
    InvalidCompositionError,
    InventoryInvariantError,
    JudgeParseError,
    JudgeUnavailableError,
    ParseError,
    PlanningFailedError,
    PortalAgentError,
    RepairFailedError,
    RunNotFoundError,
    UnknownComponentTypeError,
)
from .evaluator import (
    AutoSubscores,
    EvalReport,
    SuggestedDiff,
    autoscore,
    evaluate_output,
    evaluate_page,
    evaluate_tree,
    score_a11y,
    score_coverage,
    score_data,
    score_layout,
    score_perf,
    score_props,
    suggest_diffs,
)
from .inventory import (
    ComponentTypeDef,
    Inventory,
    PropTypeDef,
    SlotDef,
    TemplateDef,
    load_default_inventory,
    load_inventory,
    lookup_component,
)
from .judge import (
    DimensionScores,
    JudgeConfig,
    RubricScores,
    flag_for_adjudication,
    judge_pairwise,
    judge_single,
)
from .pipeline import (
    AggregateReport,
    RunRecord,
    RunStore,
    aggregate,
    bundled_scenarios,
    run_corpus,
    run_pipeline,
)
from .planner import (
    ComponentRequirement,
    Dataset,
    IntentSpec,
    PlannerConfig,
    PlanTrace,
    parse_intent,
    plan,
    select_template,
)
from .renderer import (
    RenderOutput,
    RenderStats,
    UINode,
    extract_tree,
    parse_html,
    render,
    serialize,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
