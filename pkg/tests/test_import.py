def test_import():
    import networkx_algo_window_mdp  # NOQA


def test_version():
    import networkx_algo_window_mdp
    assert networkx_algo_window_mdp.__version__
