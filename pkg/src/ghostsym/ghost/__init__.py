"""Ghost code: identification, prompts, providers, artifacts and validation."""

from .artifact import (GhostArtifact, InverseReport, make_artifact, parse_ghost, request_ghost,
                       run_fragment, run_inverse, validate_inverse)
from .identify import identify_hard_fragments, materialize
from .prompts import (INVERSE, KINDS, SURROGATE, TOPOLOGY, FragmentInfo, fragment_info,
                      prompt_hash, render_prompt)
from .providers import (FixtureProvider, GhostProvider, HttpProvider, ProviderResponse,
                        default_fixture_dir, provider_from_config)

__all__ = [
    "GhostArtifact", "InverseReport", "make_artifact", "parse_ghost", "request_ghost",
    "run_fragment", "run_inverse", "validate_inverse", "identify_hard_fragments", "materialize",
    "INVERSE", "KINDS", "SURROGATE", "TOPOLOGY", "FragmentInfo", "fragment_info", "prompt_hash",
    "render_prompt", "FixtureProvider", "GhostProvider", "HttpProvider", "ProviderResponse",
    "default_fixture_dir", "provider_from_config",
]
