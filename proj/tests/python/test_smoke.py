import pytest

import ubuntuworld as uw


@pytest.fixture(scope="module")
def dom():
    return uw.Domain.load()


def test_domain_shape(dom):
    assert len(dom.predicates) == 8
    assert len(dom.actions) == 16
    assert dom.actions[0] == "AptGet(firefox)"
    assert "open gedit file" in dom.predicates


def test_state_and_actions(dom):
    s = dom.parse_state("internet-on")
    assert not dom.applicable(s, "AptGet(gedit)")
    t = dom.apply(s, "Sudo_On")
    assert dom.applicable(t, "AptGet(gedit)")
    assert uw.Domain.satisfies(t, dom.parse_goal("sudo-on"))
    assert uw.State.from_bits(t.bits) == t


def test_plan(dom):
    plan = uw.plan(dom, dom.parse_state(""), dom.parse_goal("open gedit file"))
    assert plan == ["Internet_On", "Sudo_On", "AptGet(gedit)", "Sudo_Off", "Open_gedit(file)"]
    assert uw.plan(dom, dom.base_state(), dom.parse_goal("open firefox file")) == [
        "Open_firefox(file)"
    ]


def test_environment_rewards(dom):
    env = uw.Environment(dom)
    env.reset(dom.parse_state("internet-on"), dom.parse_goal("open gedit file"))
    obs, r = env.step("AptGet(gedit)")
    assert r == -10.0 and obs.last_failed and "Permission denied" in obs.footprint
    obs, r = env.step("Sudo_On")
    assert r == -5.0
    env.step("AptGet(gedit)")
    env.step("Sudo_Off")
    obs, r = env.step("Open_gedit(file)")
    assert r == 95.0 and obs.done and obs.goal_reached
    with pytest.raises(uw.ContractViolation):
        env.step("Sudo_On")


def test_bad_goal_raises(dom):
    with pytest.raises(Exception):
        dom.parse_goal("open emacs file")


def test_problem_generation_is_seeded(dom):
    a = uw.generate_problems(dom, 3, 20)
    b = uw.generate_problems(dom, 3, 20)
    assert [p.start for p in a] == [p.start for p in b]
    assert all(not uw.Domain.satisfies(p.start, p.goal) for p in a)


def test_retrieval(dom):
    idx = uw.CorpusIndex.load()
    assert len(idx) == 60
    hits = idx.query("Permission denied")
    assert hits and all(hits[i][1] >= hits[i + 1][1] for i in range(len(hits) - 1))
    assert uw.recommend(dom, idx, "Permission denied") == "Sudo_On"
    assert uw.recommend(dom, idx, "zyzzyva") is None
    with pytest.raises(uw.EmptyQuery):
        idx.query("the of")
    assert uw.tokenize("E: Could not open lock file!") == ["could", "not", "open", "lock", "file"]


def test_beta_schedule():
    p = uw.LearnParams()
    assert uw.beta(0, p) == 0.0
    assert all(0.0 <= uw.beta(t, p) <= 1.0 - p.epsilon for t in range(0, 5000, 37))


def test_train_is_reproducible(tmp_path):
    def run(out):
        c = uw.RunConfig()
        c.seed = 4
        c.instances = 20
        c.replays = 1
        c.out = str(out)
        uw.train(c)
        return (out / "curve.csv").read_bytes()

    a = run(tmp_path / "a")
    assert a == run(tmp_path / "b")
    assert len(a.decode().splitlines()) == 41


def test_config_errors(tmp_path):
    c = uw.RunConfig()
    c.out = str(tmp_path)
    with pytest.raises(uw.ConfigError):
        uw.train(c)  # no seed
    c.seed = 1
    c.agent = "oracle"
    with pytest.raises(uw.ConfigError):
        c.validate()
