import hypothesis

hypothesis.settings.register_profile(
    "fast", max_examples=25, deadline=None
)
hypothesis.settings.register_profile(
    "thorough", max_examples=200, deadline=None
)
hypothesis.settings.load_profile("fast")
