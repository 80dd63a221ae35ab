import hypothesis

hypothesis.settings.register_profile("repo", deadline=None, derandomize=True, max_examples=40,
                                     print_blob=True)
hypothesis.settings.load_profile("repo")
