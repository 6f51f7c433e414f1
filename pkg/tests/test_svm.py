import numpy as np
import pytest
from scipy.optimize import minimize

from classifiers.schemas import KernelSpec, LabeledDataset
from classifiers.svm import (
    MultiClassSvm, SvmModel, kkt_violations, load_svm, save_svm, svm_classify_batch,
    svm_classify_multiclass, svm_decision, svm_train_binary, svm_train_multiclass,
)
from sensing.errors import ConvergenceError, TrainingError
from sensing.rng import make_rng

LINEAR = KernelSpec(kind="linear")


def blobs(n: int = 20, gap: float = 1.0, seed: int = 0):
    rng = make_rng(seed)
    X = np.vstack([rng.standard_normal((n, 2)) + gap, rng.standard_normal((n, 2)) - gap])
    y = np.concatenate([np.ones(n), -np.ones(n)])
    return X, y


def dual_value(X, y, alpha, kernel):
    Q = np.outer(y, y) * kernel.matrix(X, X)
    return float(alpha.sum() - 0.5 * alpha @ Q @ alpha)


# ============================================================
# BINARY
# ============================================================

class TestBinary:
    def test_two_points(self):
        model = svm_train_binary(np.array([[1.0], [-1.0]]), np.array([1.0, -1.0]),
                                 C=10.0, kernel=LINEAR, standardize=False)
        np.testing.assert_allclose(model.alpha, [0.5, 0.5])
        assert model.b == pytest.approx(0.0)
        assert svm_decision(model, np.array([[0.5]]))[0] == pytest.approx(0.5)

    def test_matches_generic_solver(self):
        X, y = blobs(15, gap=0.7, seed=1)
        C = 1.0
        model = svm_train_binary(X, y, C=C, kernel=LINEAR, standardize=False, tol=1e-6)
        Q = np.outer(y, y) * LINEAR.matrix(X, X)
        res = minimize(lambda a: 0.5 * a @ Q @ a - a.sum(), np.zeros(y.size),
                       jac=lambda a: Q @ a - 1.0, method="SLSQP",
                       bounds=[(0.0, C)] * y.size,
                       constraints=[{"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y}],
                       options={"maxiter": 500, "ftol": 1e-12})
        assert dual_value(X, y, model.alpha, LINEAR) == pytest.approx(-res.fun, rel=1e-4)

    def test_constraints_and_kkt(self):
        X, y = blobs(25, gap=0.5, seed=2)
        model = svm_train_binary(X, y, C=2.0)
        assert abs(model.alpha @ model.train_y) <= 1e-9
        assert np.all((model.alpha >= 0) & (model.alpha <= 2.0))
        assert kkt_violations(model).size == 0

    def test_objective_trace_non_decreasing(self):
        X, y = blobs(20, gap=0.4, seed=3)
        model = svm_train_binary(X, y, C=1.0)
        assert model.iterations == len(model.objective_trace) > 0
        assert np.all(np.diff(model.objective_trace) >= -1e-10)

    def test_duplicate_points_with_opposite_labels(self):
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [-1.0, -1.0]])
        y = np.array([1.0, -1.0, 1.0, -1.0])
        model = svm_train_binary(X, y, C=1.0, kernel=LINEAR, standardize=False)
        assert np.all((model.alpha >= 0) & (model.alpha <= 1.0))
        assert svm_decision(model, np.array([[2.0, 2.0]]))[0] > 0

    def test_label_swap_flips_decision(self):
        X, y = blobs(20, gap=1.0, seed=4)
        a = svm_train_binary(X, y, C=1.0)
        b = svm_train_binary(X, -y, C=1.0)
        grid = make_rng(5).uniform(-3, 3, size=(50, 2))
        fa, fb = svm_decision(a, grid), svm_decision(b, grid)
        clear = np.abs(fa) > 0.1
        np.testing.assert_array_equal(np.sign(fa[clear]), -np.sign(fb[clear]))

    def test_iteration_cap(self):
        X, y = blobs(20, gap=0.2, seed=6)
        with pytest.raises(ConvergenceError) as err:
            svm_train_binary(X, y, C=1.0, max_iter=1)
        assert isinstance(err.value.best, SvmModel)

    @pytest.mark.parametrize("labels", [[1.0, 1.0], [1.0, 0.0]])
    def test_bad_labels(self, labels):
        with pytest.raises(TrainingError):
            svm_train_binary(np.zeros((2, 2)), np.array(labels))

    def test_bad_c(self):
        with pytest.raises(TrainingError):
            svm_train_binary(np.array([[1.0], [-1.0]]), np.array([1.0, -1.0]), C=0.0)


# ============================================================
# ONE-VS-ONE
# ============================================================

class TestMultiClass:
    def test_vote_cycle_broken_by_decision_strength(self):
        model = MultiClassSvm(K=3, models={
            (1, 2): SvmModel.constant(0.5),
            (2, 3): SvmModel.constant(1.0),
            (1, 3): SvmModel.constant(-2.0),
        })
        assert svm_classify_multiclass(model, np.zeros(5)) == 3

    def test_full_tie_goes_to_smaller_class(self):
        model = MultiClassSvm(K=3, models={
            (1, 2): SvmModel.constant(1.0),
            (2, 3): SvmModel.constant(1.0),
            (1, 3): SvmModel.constant(-1.0),
        })
        assert svm_classify_multiclass(model, np.zeros(5)) == 1

    def test_separable_three_classes(self):
        rng = make_rng(7)
        X = np.vstack([rng.standard_normal((10, 5)) * 0.3 + 3.0 * k for k in range(3)])
        data = LabeledDataset(X, np.repeat([1, 2, 3], 10), 3)
        model = svm_train_multiclass(data, C=1.0, workers=2)
        assert model.pairs == [(1, 2), (1, 3), (2, 3)]
        np.testing.assert_array_equal(svm_classify_batch(model, X), data.labels)

    def test_two_classes(self):
        X, y = blobs(10, gap=2.0, seed=8)
        data = LabeledDataset(X, np.where(y > 0, 1, 2), 2)
        model = svm_train_multiclass(data)
        assert model.pairs == [(1, 2)]
        assert svm_classify_multiclass(model, np.array([3.0, 3.0])) == 1

    def test_missing_class(self):
        data = LabeledDataset(np.zeros((2, 5)), np.array([1, 2]), 3)
        with pytest.raises(TrainingError):
            svm_train_multiclass(data)

    def test_save_and_load(self, tmp_path):
        X, y = blobs(10, gap=1.0, seed=9)
        data = LabeledDataset(X, np.where(y > 0, 1, 2), 2)
        model = svm_train_multiclass(data)
        loaded = load_svm(save_svm(model, tmp_path / "svm.json"))
        np.testing.assert_allclose(svm_decision(loaded.models[(1, 2)], X),
                                   svm_decision(model.models[(1, 2)], X))
