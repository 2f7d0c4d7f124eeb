import json

import numpy as np
import pytest

from cavity_route import (
    DISPERSIVE,
    HADAMARD_SIGNS,
    RESONANT,
    HexLatticeDescriptor,
    NetworkSpec,
    Site,
    SystemParams,
    atom_index,
    build_diamond_chain,
    build_hex_lattice,
    build_single_excitation_hamiltonian,
    build_switch,
    cavity_index,
    hex_lattice_layout,
)


class TestSystemParams:
    def test_defaults(self):
        p = SystemParams()
        assert (p.omega_c, p.delta, p.g, p.j) == (1.0, 0.0, 65.0, 1.0)

    def test_omega_a_is_cavity_minus_detuning(self):
        p = SystemParams(delta=-1000.0)
        assert p.omega_a == p.omega_c - p.delta == 1001.0

    def test_regime_constants(self):
        assert RESONANT.delta == 0.0
        assert DISPERSIVE.delta == -1000.0
        assert RESONANT.g == DISPERSIVE.g == 65.0

    @pytest.mark.parametrize("bad", [dict(g=0.0), dict(g=-1.0), dict(j=0.0), dict(j=-2.0)])
    def test_rejects_nonpositive_couplings(self, bad):
        with pytest.raises(ValueError):
            SystemParams(**bad)

    @pytest.mark.parametrize("bad", [dict(omega_c=float("nan")), dict(delta=float("inf"))])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            SystemParams(**bad)

    def test_json_round_trip(self):
        p = SystemParams(omega_c=2.0, delta=-5.0, g=10.0, j=0.5)
        assert SystemParams.from_json_dict(p.to_json_dict()) == p

    def test_json_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            SystemParams.from_json_dict({"omega_c": 1.0, "kappa": 3.0})

    def test_json_defaults_for_missing_keys(self):
        assert SystemParams.from_json_dict({}) == SystemParams()


def test_mode_layout():
    assert cavity_index(0) == 0
    assert atom_index(0) == 1
    assert cavity_index(5) == 10
    assert atom_index(5) == 11


class TestDiamondChain:
    def test_single_unit_edges(self):
        spec = build_diamond_chain(1)
        assert spec.num_sites == 4
        assert set(spec.edges) == {(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, -1)}

    def test_sizes_and_labels(self):
        spec = build_diamond_chain(3)
        assert spec.num_sites == 10
        assert len(spec.edges) == 12
        assert [s.label for s in spec.sites] == [str(i) for i in range(1, 11)]

    def test_vertex_and_control_roles(self):
        spec = build_diamond_chain(2)
        vertices = [s.label for s in spec.sites if s.role == "vertex"]
        controls = [s.label for s in spec.sites if s.role == "control"]
        assert vertices == ["1", "4", "7"]
        assert controls == ["2", "3", "5", "6"]

    def test_negative_edge_per_unit(self):
        spec = build_diamond_chain(4)
        negative = sorted((k, l) for k, l, s in spec.edges if s == -1)
        assert negative == [(3 * k + 2, 3 * k + 3) for k in range(4)]

    def test_rejects_empty_chain(self):
        with pytest.raises(ValueError):
            build_diamond_chain(0)


class TestSwitch:
    def test_sites_and_roles(self):
        spec = build_switch()
        assert spec.num_sites == 8
        assert spec.sites[0].role == "upload"
        assert [s.role for s in spec.sites[1:4]] == ["port"] * 3
        assert [s.role for s in spec.sites[4:]] == ["control"] * 4
        assert spec.site_by_label("mu2").id == 6

    def test_edges_follow_hadamard_signs(self):
        spec = build_switch()
        assert len(spec.edges) == 16
        for k, l, sign in spec.edges:
            inner, outer = k - 4, l
            assert sign == HADAMARD_SIGNS[inner][outer]

    def test_hadamard_rows_orthogonal(self):
        m = np.array(HADAMARD_SIGNS, dtype=float)
        assert np.array_equal(m @ m.T, 4.0 * np.eye(4))


class TestNetworkSpecValidation:
    def _sites(self, n):
        return tuple(Site(id=i, label=str(i), role="plain") for i in range(n))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            NetworkSpec(sites=self._sites(2), edges=((0, 0, 1),), params=SystemParams())

    def test_rejects_bad_sign(self):
        with pytest.raises(ValueError):
            NetworkSpec(sites=self._sites(2), edges=((0, 1, 2),), params=SystemParams())

    def test_rejects_duplicate_edge_either_orientation(self):
        for dup in ((0, 1, 1), (1, 0, -1)):
            with pytest.raises(ValueError):
                NetworkSpec(
                    sites=self._sites(2), edges=((0, 1, 1), dup), params=SystemParams()
                )

    def test_rejects_non_consecutive_ids(self):
        sites = (Site(id=0, label="a", role="plain"), Site(id=2, label="b", role="plain"))
        with pytest.raises(ValueError):
            NetworkSpec(sites=sites, edges=(), params=SystemParams())

    def test_rejects_edge_outside_sites(self):
        with pytest.raises(ValueError):
            NetworkSpec(sites=self._sites(2), edges=((0, 5, 1),), params=SystemParams())

    def test_json_round_trip_is_structural_identity(self):
        spec = build_diamond_chain(2, DISPERSIVE)
        again = NetworkSpec.loads(spec.dumps())
        assert again == spec
        # and the JSON itself is stable
        assert json.loads(spec.dumps()) == json.loads(again.dumps())

    def test_json_key_layout(self):
        data = build_switch().to_json_dict()
        assert set(data) == {"sites", "edges", "params"}
        assert set(data["sites"][0]) == {"id", "label", "role"}
        assert set(data["params"]) == {"omega_c", "delta", "g", "j"}


class TestHamiltonian:
    def test_shape_and_symmetry(self):
        spec = build_diamond_chain(2)
        h = build_single_excitation_hamiltonian(spec)
        assert h.shape == (14, 14)
        assert np.array_equal(h, h.T)

    def test_onsite_and_coupling_entries(self):
        params = SystemParams(omega_c=2.0, delta=-3.0, g=7.0, j=1.5)
        spec = build_diamond_chain(1, params)
        h = build_single_excitation_hamiltonian(spec)
        for i in range(4):
            assert h[2 * i, 2 * i] == params.omega_c
            assert h[2 * i + 1, 2 * i + 1] == params.omega_a
            assert h[2 * i, 2 * i + 1] == params.g
        assert h[0, 2] == params.j  # +j hop
        assert h[4, 6] == -params.j  # the signed hop
        assert h[1, 3] == 0.0  # atoms never couple directly

    def test_no_cavity_atom_cross_site_terms(self):
        h = build_single_excitation_hamiltonian(build_switch())
        for k in range(8):
            for l in range(8):
                if k != l:
                    assert h[2 * k, 2 * l + 1] == 0.0


class TestHexDescriptor:
    def test_rejects_unknown_vertex_in_link(self):
        with pytest.raises(ValueError):
            HexLatticeDescriptor(vertices=("a",), links=(("a", 1, "z", 1),), uploads=("a",))

    def test_rejects_port_zero_in_link(self):
        with pytest.raises(ValueError):
            HexLatticeDescriptor(
                vertices=("a", "b"), links=(("a", 0, "b", 1),), uploads=("a",)
            )

    def test_rejects_slot_reuse(self):
        with pytest.raises(ValueError):
            HexLatticeDescriptor(
                vertices=("a", "b", "c"),
                links=(("a", 1, "b", 1), ("a", 1, "c", 2)),
                uploads=("a",),
            )

    def test_rejects_self_link(self):
        with pytest.raises(ValueError):
            HexLatticeDescriptor(vertices=("a",), links=(("a", 1, "a", 2),), uploads=())

    def test_rejects_upload_on_unknown_vertex(self):
        with pytest.raises(ValueError):
            HexLatticeDescriptor(vertices=("a",), links=(), uploads=("b",))

    def test_json_round_trip(self):
        desc = HexLatticeDescriptor(
            vertices=("a", "b"), links=(("a", 1, "b", 1),), uploads=("a", "b")
        )
        data = {"vertices": ["a", "b"], "links": [["a", 1, "b", 1]], "uploads": ["a", "b"]}
        assert HexLatticeDescriptor.from_json_dict(data) == desc


class TestHexLayout:
    def _two_vertex(self):
        return HexLatticeDescriptor(
            vertices=("a", "b"), links=(("a", 1, "b", 1),), uploads=("a", "b")
        )

    def test_two_vertex_counts(self):
        layout = hex_lattice_layout(self._two_vertex())
        # 8 inner + 1 shared link + 2 uploads + 4 dangling
        assert len(layout.sites) == 15
        assert len(layout.edges) == 32

    def test_link_site_is_shared(self):
        desc = self._two_vertex()
        layout = hex_lattice_layout(desc)
        assert layout.occupant[("a", 1)] == layout.occupant[("b", 1)]

    def test_every_slot_occupied(self):
        desc = self._two_vertex()
        layout = hex_lattice_layout(desc)
        assert set(layout.occupant) == {(v, p) for v in desc.vertices for p in range(4)}

    def test_deterministic(self):
        desc = self._two_vertex()
        a, b = hex_lattice_layout(desc), hex_lattice_layout(desc)
        assert [s.label for s in a.sites] == [s.label for s in b.sites]
        assert a.edges == b.edges

    def test_edge_signs_follow_hadamard(self):
        desc = self._two_vertex()
        layout = hex_lattice_layout(desc)
        inner_a = layout.inner["a"]
        for i in range(4):
            for port in range(4):
                occupant = layout.occupant[("a", port)]
                matches = [
                    s for k, l, s in layout.edges if {k, l} == {inner_a[i], occupant}
                ]
                assert matches == [HADAMARD_SIGNS[i][port]]

    def test_onsite_terms_counted_once(self):
        # the shared link site must contribute a single omega_c, not two
        desc = self._two_vertex()
        spec = build_hex_lattice(desc, RESONANT)
        h = build_single_excitation_hamiltonian(spec)
        assert spec.dim == 30
        assert np.allclose(np.diag(h)[0::2], RESONANT.omega_c)
        assert np.allclose(np.diag(h)[1::2], RESONANT.omega_a)
