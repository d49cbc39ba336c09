from hypothesis import HealthCheck, settings

# deterministic property runs: same examples every invocation
settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")
