"""Campaign harness: corpus, configuration, orchestration and the command line."""

from .campaign import (GhostPlan, ProgramReport, prepare_ghost, Report, branch_sites, make_provider, report_coverage,
                       run_campaign, run_program)
from .config import MODES, CampaignConfig, load_config, parse_config
from .corpus import CORPUS_DIR, corpus_names, corpus_program, load_corpus, sync_fixtures

__all__ = ["GhostPlan", "prepare_ghost", "ProgramReport", "Report", "branch_sites", "make_provider", "report_coverage",
           "run_campaign", "run_program", "MODES", "CampaignConfig", "load_config",
           "parse_config", "CORPUS_DIR", "corpus_names", "corpus_program", "load_corpus",
           "sync_fixtures"]
