import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("ci")

# The motivating sentence exercised throughout the docs and tests: an
# ambiguous informal input where first-come-first-served rule application
# picks the wrong expansions.
AMBIG_SENTENCE = "always, always they think I an extro, but Im a big intro actually"

DEMO_RULES = (
    "r_extro\textro\textra|extrovert\n"
    "r_intro\tintro\tintroduction|introvert\n"
)


@pytest.fixture
def demo_rules_path(tmp_path):
    p = tmp_path / "rules.tsv"
    p.write_text(DEMO_RULES, encoding="utf-8")
    return p
