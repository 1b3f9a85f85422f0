import numpy as np
import pytest

from qss import oracle
from qss.phasedist import qc_pmf


class TestGroverRotation:
    def test_identity_at_zero(self):
        assert np.array_equal(oracle.grover_rotation(0.0), np.eye(2))

    def test_quarter_turn(self):
        g = oracle.grover_rotation(0.25)
        assert np.allclose(g, [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)
        assert np.allclose(np.sort(np.linalg.eigvals(g).imag), [-1.0, 1.0], atol=1e-12)

    def test_eigenphases_recovered(self):
        g = oracle.grover_rotation(1 / 6)
        eig = np.linalg.eigvals(g)
        recovered = np.sort(np.angle(eig) / (2 * np.pi))
        assert np.allclose(recovered, [-1 / 6, 1 / 6], atol=1e-12)


class TestSimulatePea:
    def test_on_grid_point_mass(self):
        table = oracle.simulate_pea(3 / 16, 4)
        assert table.mass[3] == pytest.approx(1.0, abs=1e-12)
        assert table.mass.sum() == pytest.approx(1.0, abs=1e-12)

    def test_matches_analytic_table(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            t = int(rng.integers(1, 9))
            phi = float(rng.random() * 0.5)
            dev = np.max(np.abs(qc_pmf(phi, 2**t).mass - oracle.simulate_pea(phi, t).mass))
            assert dev < 1e-10

    def test_accuracy_bound_small_grid(self):
        table = oracle.simulate_pea(0.3, 3)
        near = np.abs(table.support - 0.3) <= 1 / 8 + 1e-15
        assert table.mass[near].sum() >= 8 / np.pi**2

    def test_rejects_out_of_range_t(self):
        for t in (0, 13):
            with pytest.raises(ValueError):
                oracle.simulate_pea(0.1, t)


class TestOracleTable:
    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            oracle.OracleTable(n=2, b=2, b0=2, values=np.zeros(3))

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ValueError):
            oracle.OracleTable(n=1, b=2, b0=1, values=np.array([0.0, 2.0]))

    def test_quantization_truncates(self):
        tbl = oracle.OracleTable(n=1, b=3, b0=1, values=np.array([0.3, 1.99]))
        assert np.array_equal(tbl.quantized(), [0.25, 1.75])


class TestCountG:
    def test_worked_example(self):
        tbl = oracle.OracleTable(n=2, b=2, b0=2, values=np.array([0.0, 1.0, 2.0, 3.0]))
        assert oracle.count_g(tbl) == 6

    def test_all_zero(self):
        tbl = oracle.OracleTable(n=3, b=4, b0=2, values=np.zeros(8))
        assert oracle.count_g(tbl) == 0

    def test_all_max_representable(self):
        n, b, b0 = 3, 4, 2
        top = 2.0**b0 - 2.0 ** (b0 - b)
        tbl = oracle.OracleTable(n=n, b=b, b0=b0, values=np.full(2**n, top))
        assert oracle.count_g(tbl) == 2**n * (2**b - 1)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            b = int(rng.integers(1, 5))
            b0 = int(rng.integers(0, b + 1))
            tbl = oracle.random_oracle_table(rng, n, b, b0)
            q = tbl.quantized()
            step = 2.0 ** (b0 - b)
            naive = sum(
                1
                for j in range(2**n)
                for k in range(2**b)
                if q[j] > step * k
            )
            assert oracle.count_g(tbl) == naive


class TestCountingRelation:
    def test_worked_example(self):
        tbl = oracle.OracleTable(n=2, b=2, b0=2, values=np.array([0.0, 1.0, 2.0, 3.0]))
        assert oracle.verify_counting_relation(tbl) == (1.5, 1.5)

    def test_all_zero(self):
        tbl = oracle.OracleTable(n=2, b=3, b0=1, values=np.zeros(4))
        assert oracle.verify_counting_relation(tbl) == (0.0, 0.0)

    def test_exact_equality_randomized(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            b = int(rng.integers(1, 7))
            b0 = int(rng.integers(0, b + 1))
            tbl = oracle.random_oracle_table(rng, n, b, b0)
            s_direct, s_via_g = oracle.verify_counting_relation(tbl)
            assert s_direct == s_via_g  # bit-exact, not approximate

    def test_truncation_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            b = int(rng.integers(1, 7))
            b0 = int(rng.integers(0, b + 1))
            tbl = oracle.random_oracle_table(rng, n, b, b0)
            s_direct, _ = oracle.verify_counting_relation(tbl)
            raw = float(tbl.values.sum()) * 2.0**-n
            assert abs(s_direct - raw) < 2.0 ** (b0 - b)


class TestRotationAngle:
    def test_quarter_marked_gives_one_sixth(self):
        # one marked pair out of four: sin(pi phi) = 1/2
        tbl = oracle.OracleTable(n=1, b=1, b0=1, values=np.array([0.0, 1.0]))
        assert oracle.count_g(tbl) == 1
        assert oracle.verify_rotation_angle(tbl) == pytest.approx(1 / 6, abs=1e-12)

    def test_degenerate_all_zero(self):
        tbl = oracle.OracleTable(n=2, b=2, b0=1, values=np.zeros(4))
        with pytest.raises(oracle.DegenerateRotationError):
            oracle.verify_rotation_angle(tbl)

    def test_matches_closed_form_on_five_qubits(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n, b = 2, 3  # n + b = 5 qubits
            b0 = int(rng.integers(0, b + 1))
            tbl = oracle.random_oracle_table(rng, n, b, b0)
            marked = oracle.count_g(tbl)
            if marked == 0:
                continue
            expected = float(np.arcsin(np.sqrt(marked / 2.0 ** (n + b))) / np.pi)
            assert oracle.verify_rotation_angle(tbl) == pytest.approx(
                expected, abs=1e-12
            )
