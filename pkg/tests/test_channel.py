import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risopt.channel import ChannelValue, RisLoad, channel_no_coupling, end_to_end_channel, snr_gain
from risopt.em_model import ImpedanceNetwork
from risopt.errors import SeriesResonance, SingularMatrix

from conftest import paper_network


def random_network(rng, n, coupled=True):
    z = lambda *shape: rng.normal(size=shape) + 1j * rng.normal(size=shape)
    Z = z(n, n)
    Z = 0.5 * (Z + Z.T) if coupled else np.diag(np.diag(Z))
    Z[np.diag_indices(n)] = 2.0 - 50j
    return ImpedanceNetwork(complex(*rng.normal(size=2)), z(n), z(n), Z)


class TestRisLoad:
    def test_diagonal(self):
        load = RisLoad([1.0, -2.0], 0.2)
        assert np.array_equal(load.diagonal, [0.2 + 1j, 0.2 - 2j])
        assert load.matrix().shape == (2, 2)
        assert load.n == 2

    @pytest.mark.parametrize("reactances, R0", [([], 0.2), ([np.inf], 0.2), ([1.0], -0.1)])
    def test_rejects(self, reactances, R0):
        with pytest.raises(ValueError):
            RisLoad(reactances, R0)


class TestEndToEnd:
    def test_single_element_hand_value(self):
        net = ImpedanceNetwork(0.5 + 0.1j, [2 + 1j], [1 - 3j], [[4 - 2j]])
        load = RisLoad([5.0], 1.0)
        expected = (0.5 + 0.1j) - (1 - 3j) * (2 + 1j) / (4 - 2j + 1 + 5j)
        assert end_to_end_channel(net, load).h == pytest.approx(expected, rel=1e-14)
        assert end_to_end_channel(net, load, Y0=2j).h == pytest.approx(2j * expected, rel=1e-14)

    def test_matches_explicit_inverse(self, rng):
        net = random_network(rng, 6)
        load = RisLoad(rng.normal(size=6) * 10, 0.2)
        G = net.Z_SS + load.matrix()
        expected = net.Z_RT - net.z_RS @ np.linalg.inv(G) @ net.z_ST
        assert end_to_end_channel(net, load).h == pytest.approx(expected, rel=1e-12)

    def test_diagonal_agrees_with_no_coupling_form(self, rng):
        net = random_network(rng, 5, coupled=False)
        load = RisLoad(rng.normal(size=5), 0.2)
        assert channel_no_coupling(net, load).h == pytest.approx(end_to_end_channel(net, load).h, rel=1e-10)

    def test_paper_network_diagonal_agreement(self):
        net = paper_network(8, 0.25).diagonal_only()
        load = RisLoad(np.full(64, 1500.0), 0.2)
        assert channel_no_coupling(net, load).h == pytest.approx(end_to_end_channel(net, load).h, rel=1e-10)

    def test_no_coupling_ignores_off_diagonals(self, rng):
        net = random_network(rng, 4)
        load = RisLoad(np.zeros(4), 0.2)
        assert channel_no_coupling(net, load).h == channel_no_coupling(net.diagonal_only(), load).h

    def test_size_mismatch(self, rng):
        with pytest.raises(ValueError):
            end_to_end_channel(random_network(rng, 3), RisLoad([0.0], 0.2))

    def test_singular(self):
        net = ImpedanceNetwork(0, [1.0], [1.0], [[-0.2 + 1j]])
        with pytest.raises(SingularMatrix):
            end_to_end_channel(net, RisLoad([-1.0], 0.2))

    def test_series_resonance(self):
        net = ImpedanceNetwork(0, [1.0], [1.0], [[-0.2 + 1j]])
        with pytest.raises(SeriesResonance):
            channel_no_coupling(net, RisLoad([-1.0], 0.2))

    def test_open_circuit_element_drops_out(self):
        net = paper_network(2, 0.25)
        X = np.array([1e12, 1500.0, 1400.0, 1300.0])
        full = end_to_end_channel(net, RisLoad(X, 0.2)).h
        keep = [1, 2, 3]
        reduced = ImpedanceNetwork(net.Z_RT, net.z_ST[keep], net.z_RS[keep], net.Z_SS[np.ix_(keep, keep)])
        assert full == pytest.approx(end_to_end_channel(reduced, RisLoad(X[keep], 0.2)).h, rel=1e-4)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.0, 2 * np.pi))
    def test_y0_phase_only_rotates(self, n, seed, angle):
        r = np.random.default_rng(seed)
        net = random_network(r, n)
        load = RisLoad(r.normal(size=n) * 5, 0.2)
        h1 = end_to_end_channel(net, load).h
        h2 = end_to_end_channel(net, load, Y0=np.exp(1j * angle)).h
        assert abs(h2) == pytest.approx(abs(h1), rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_reciprocity(self, n, seed):
        # swapping Tx and Rx leaves the channel unchanged for symmetric Z_SS
        r = np.random.default_rng(seed)
        net = random_network(r, n)
        load = RisLoad(r.normal(size=n) * 5, 0.2)
        swapped = ImpedanceNetwork(net.Z_RT, net.z_RS, net.z_ST, net.Z_SS)
        assert end_to_end_channel(swapped, load).h == pytest.approx(end_to_end_channel(net, load).h, rel=1e-10)


class TestSnr:
    def test_values(self):
        assert snr_gain(10.0) == pytest.approx(20.0)
        assert snr_gain(ChannelValue(1j), noise_power=0.1) == pytest.approx(10.0)

    def test_gain_db(self):
        assert ChannelValue(0.1).gain_db == pytest.approx(-20.0)
        assert ChannelValue(0).gain_db == -np.inf

    def test_bad_noise(self):
        with pytest.raises(ValueError):
            snr_gain(1.0, noise_power=0.0)
