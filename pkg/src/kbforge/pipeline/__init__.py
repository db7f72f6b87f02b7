from kbforge.pipeline.config import PipelineConfig, load_config
from kbforge.pipeline.stages import EVAL_ANALYSES, STAGES, StageResult, run_all, run_stage

__all__ = ["EVAL_ANALYSES", "PipelineConfig", "STAGES", "StageResult", "load_config", "run_all", "run_stage"]
