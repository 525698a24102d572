import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import lottery, sure
from rrmtools.data_manage.dataset import Dataset
from rrmtools.errors import EmptyDataset, SchemaViolation, ValidationError
from rrmtools.features import GATE_FEATURE_NAMES, RAW_FEATURE_NAMES, cdf_distance, decile_bins, gate_features, \
    menu_covariates, raw_encoding, rescale_factor
from rrmtools.features.matrix import covariate_matrix, feature_matrix, feature_names, read_feature_override, \
    write_feature_dump
from rrmtools.lottery import Menu


def test_rescale_factor():
    menus = [Menu("a", lottery((-50, 0.5), (20, 0.5)), sure(100)), Menu("b", sure(3), sure(-7))]
    assert rescale_factor(menus) == 100
    assert rescale_factor([Menu("z", sure(0), sure(0))]) == 1.0
    with pytest.raises(EmptyDataset):
        rescale_factor([])


class TestGateFeatures:
    def test_degenerate_menu(self):
        z = gate_features(Menu("m", sure(2), sure(1)), 1.0)
        assert len(z) == len(GATE_FEATURE_NAMES) == 12
        assert_allclose(z[:6], [1, 1, 1, 0, 1, 0])
        assert_allclose(z[6:], [2, 1, 0, 0, 2, 0])

    def test_symmetric_menu(self):
        lot = lottery((-3, 0.2), (4, 0.5), (9, 0.3))
        z = gate_features(Menu("m", lot, lot), 9.0)
        assert_allclose(z[:6], 0.0, atol=1e-12)
        assert z[6] == pytest.approx(z[7])
        assert z[8] == pytest.approx(z[9])
        assert z[10] == pytest.approx(1.0)

    def test_scale_invariance(self):
        menu = Menu("m", lottery((0, 0.5), (10, 0.5)), lottery((2, 0.25), (6, 0.75)))
        scaled = Menu("s", lottery((0, 0.5), (100, 0.5)), lottery((20, 0.25), (60, 0.75)))
        assert_allclose(gate_features(menu, 10.0), gate_features(scaled, 100.0))

    def test_rejects_nonpositive_factor(self):
        with pytest.raises(ValidationError):
            gate_features(Menu("m", sure(1), sure(0)), 0.0)


class TestRawEncoding:
    def test_layout(self):
        z = raw_encoding(Menu("m", sure(1), lottery((-2, 0.25), (4, 0.75))), 1.0)
        assert len(z) == len(RAW_FEATURE_NAMES) == 40
        left_x, left_p, right_x, right_p = np.split(z, 4)
        assert_allclose(left_x, [1] + [0] * 9)
        assert_allclose(left_p, [1] + [0] * 9)
        assert_allclose(right_x, [-2, 4] + [0] * 8)
        assert_allclose(right_p, [0.25, 0.75] + [0] * 8)

    def test_large_support_keeps_smallest_outcomes(self):
        big = lottery(*[(x, 1 / 12) for x in range(12)])
        left_x = raw_encoding(Menu("m", big, sure(0)), 1.0)[:10]
        assert_allclose(left_x, np.arange(10))


class TestCovariates:
    def test_identical_lotteries(self):
        lot = lottery((0, 0.4), (3, 0.6))
        c = menu_covariates(Menu("m", lot, lot))
        assert c.tc == 0.0 and c.risk_asym == 0.0

    def test_sure_menu_has_no_tradeoff(self):
        menu = Menu("m", sure(1), sure(0))
        assert cdf_distance(menu.left, menu.right) == pytest.approx(1.0)
        assert menu_covariates(menu).tc == pytest.approx(0.0)

    def test_mean_preserving_spread(self):
        menu = Menu("m", lottery((0, 0.5), (2, 0.5)), sure(1))
        assert cdf_distance(menu.left, menu.right) == pytest.approx(1.0)
        c = menu_covariates(menu)
        assert c.tc == pytest.approx(np.log(2))
        assert c.risk_asym == pytest.approx(1.0)


class TestDecileBins:
    def test_equal_bins(self):
        assignment = decile_bins(np.arange(100.0), 10)
        assert assignment.n_bins == 10 and not assignment.degenerate
        assert np.bincount(assignment.bins).tolist() == [10] * 10
        assert assignment.members(0).tolist() == list(range(10))

    def test_constant_vector(self):
        assignment = decile_bins(np.full(30, 2.5), 10)
        assert assignment.n_bins == 1 and assignment.degenerate
        assert np.all(assignment.bins == 0)

    def test_bins_follow_value_order(self, rng):
        values = rng.normal(size=200)
        bins = decile_bins(values, 5).bins
        order = np.argsort(values)
        assert np.all(np.diff(bins[order]) >= 0)

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            decile_bins([1.0, 2.0], 1)
        with pytest.raises(ValidationError):
            decile_bins([1.0, np.inf], 2)


class TestFeatureMatrix:
    def test_rows_follow_dataset(self, small_menus):
        dataset = Dataset.build("small", small_menus)
        z = feature_matrix(dataset)
        assert z.shape == (6, 12)
        assert_allclose(z[2], gate_features(small_menus[2], dataset.rescale_factor))
        assert feature_matrix(dataset, "raw").shape == (6, 40)
        with pytest.raises(ValueError, match="Unsupported encoding"):
            feature_matrix(dataset, "pixels")

    def test_feature_names(self):
        assert feature_names("gate", 12) == GATE_FEATURE_NAMES
        assert feature_names("gate", 2) == ("z_1", "z_2")

    def test_override_is_used_and_restored_from_dump(self, noiseless_dataset, tmp_path):
        z = feature_matrix(noiseless_dataset)
        assert_allclose(z, noiseless_dataset.feature_override)

        path = tmp_path / "features.csv"
        write_feature_dump(noiseless_dataset, path)
        plain = Dataset.build("plain", noiseless_dataset.menus)
        assert_allclose(feature_matrix(read_feature_override(plain, path)), z)

    def test_override_dump_must_cover_all_menus(self, small_menus, tmp_path):
        dataset = Dataset.build("small", small_menus)
        path = tmp_path / "features.csv"
        write_feature_dump(Dataset.build("part", small_menus[:3]), path)
        with pytest.raises(SchemaViolation):
            read_feature_override(dataset, path)

    def test_covariate_matrix(self, small_menus):
        covariates = covariate_matrix(Dataset.build("small", small_menus))
        assert set(covariates) == {"tc", "risk_asym"}
        assert covariates["tc"].shape == (6,)
        assert np.all(covariates["tc"] >= 0)
