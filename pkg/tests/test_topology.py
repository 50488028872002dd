import pytest
from hypothesis import given, strategies as st

from semsim import World, topology
from semsim.errors import (
    CapacityExceeded,
    DuplicateMover,
    DuplicateNameError,
    ModelError,
    PortionNotPresent,
    PushWithoutConnection,
    UnknownEntityError,
)
from semsim.topology import MoveBatch


def line_world(n=3, capacity=1, medium="blood_path"):
    w = World("line")
    w.define_substance("blood", phase="liquid")
    names = [f"C{i}" for i in range(n)]
    for name in names:
        w.add_compartment(name, medium, capacity)
    for a, b in zip(names, names[1:]):
        w.connect(a, b, "fluid")
    return w, names


def test_add_compartment_and_duplicates():
    w = World("w")
    w.add_compartment("LeftAtrium", "blood_path", 1)
    w.add_compartment("ExternalAir", "air_path", capacity=None)
    with pytest.raises(DuplicateNameError):
        w.add_compartment("LeftAtrium", "blood_path", 1)
    with pytest.raises(ModelError):
        w.add_compartment("Bad", "blood_path", 0)


def test_connect_and_direction():
    w, names = line_world()
    assert w.is_connected("C0", "C1", "fluid")
    assert not w.is_connected("C1", "C0", "fluid")
    with pytest.raises(UnknownEntityError):
        w.connect("C0", "Nowhere", "fluid")
    with pytest.raises(DuplicateNameError):
        w.connect("C0", "C1", "fluid")


def test_is_connected_empty_graph():
    w = World("w")
    assert not w.is_connected("A", "B", "fluid")


def test_stage_requires_connection():
    w, names = line_world()
    p = w.create_portion("blood", compartment="C1")
    batch = MoveBatch()
    with pytest.raises(PushWithoutConnection):
        topology.stage_move(w, batch, p.id, "C1", "C0")  # edge is C0 -> C1 only


def test_stage_requires_presence():
    w, names = line_world()
    p = w.create_portion("blood", compartment="C0")
    batch = MoveBatch()
    with pytest.raises(PortionNotPresent):
        topology.stage_move(w, batch, p.id, "C1", "C2")


def test_duplicate_mover_rejected():
    w, names = line_world()
    p = w.create_portion("blood", compartment="C0")
    batch = MoveBatch()
    topology.stage_move(w, batch, p.id, "C0", "C1")
    with pytest.raises(DuplicateMover):
        topology.stage_move(w, batch, p.id, "C0", "C1")


def test_staging_is_pure():
    w, names = line_world()
    p = w.create_portion("blood", compartment="C0")
    before = {cid: list(c.contents) for cid, c in w.compartments.items()}
    batch = MoveBatch()
    for _ in range(1):
        topology.stage_move(w, batch, p.id, "C0", "C1")
    after = {cid: list(c.contents) for cid, c in w.compartments.items()}
    assert before == after
    assert batch.move_count == 1


def test_commit_moves_and_traces():
    w, names = line_world()
    p = w.create_portion("blood", compartment="C0")
    batch = MoveBatch()
    topology.stage_move(w, batch, p.id, "C0", "C1")
    record = topology.commit(w, batch)
    assert w.compartments["C1"].contents == [p.id]
    assert p.compartment == "C1" and p.location_state == "C1"
    assert record.trace_lines == ["pushed C0Blood", "trigger updates"]
    assert batch.status == "committed"


def test_commit_empty_batch_is_noop_with_trigger_updates():
    w, names = line_world()
    record = topology.commit(w, MoveBatch())
    assert record.applied == []
    assert record.trace_lines == ["trigger updates"]


def test_committed_batch_is_immutable():
    w, names = line_world()
    p = w.create_portion("blood", compartment="C0")
    batch = MoveBatch()
    topology.commit(w, batch)
    from semsim.errors import BatchStateError

    with pytest.raises(BatchStateError):
        topology.stage_move(w, batch, p.id, "C0", "C1")
    with pytest.raises(BatchStateError):
        topology.commit(w, batch)


def test_air_capacity_collision_is_error():
    w = World("w")
    w.define_substance("air", phase="gas")
    w.add_compartment("A", "air_path", 1)
    w.add_compartment("B", "air_path", 1)
    w.add_compartment("Nose", "air_path", 1)
    w.connect("A", "Nose", "fluid")
    w.connect("B", "Nose", "fluid")
    pa = w.create_portion("air", compartment="A")
    pb = w.create_portion("air", compartment="B")
    batch = MoveBatch()
    topology.stage_move(w, batch, pa.id, "A", "Nose")
    topology.stage_move(w, batch, pb.id, "B", "Nose")
    with pytest.raises(CapacityExceeded):
        topology.commit(w, batch)


def test_blood_capacity_collision_merges():
    w = World("w")
    w.define_substance("blood", phase="liquid")
    w.add_compartment("A", "blood_path", 1)
    w.add_compartment("B", "blood_path", 1)
    w.add_compartment("RA", "blood_path", 1)
    w.connect("A", "RA", "fluid")
    w.connect("B", "RA", "fluid")
    pa = w.create_portion("blood", compartment="A")
    pb = w.create_portion("blood", compartment="B")
    batch = MoveBatch()
    topology.stage_move(w, batch, pa.id, "A", "RA")
    topology.stage_move(w, batch, pb.id, "B", "RA")
    record = topology.commit(w, batch)
    assert len(record.merges) == 1
    merged = w.portions[record.merges[0]]
    assert merged.compartment == "RA"
    assert set(merged.provenance) == {pa.id, pb.id}
    assert len(w.live_portions("blood")) == 1


def cardio_ring():
    w = World("ring")
    w.define_substance("blood", phase="liquid")
    order = ("LA", "LV", "MC", "CC", "RA", "RV", "AC")
    succ = {
        "LA": ("LV",), "LV": ("MC", "CC"), "MC": ("RA",), "CC": ("RA",),
        "RA": ("RV",), "RV": ("AC",), "AC": ("LA",),
    }
    for name in order:
        w.add_compartment(name, "blood_path", 1)
    for src, dsts in succ.items():
        for dst in dsts:
            w.connect(src, dst, "fluid")
    circuit = w.define_circuit("loop", order, succ)
    for i, name in enumerate(order):
        w.create_portion("blood", entity_id=f"b-{i}", compartment=name)
    return w, circuit


def test_ring_push_stages_one_move_per_occupied_compartment():
    w, circuit = cardio_ring()
    batch = topology.ring_push(w, circuit)
    assert batch.move_count == 7


def test_ring_push_empty_circuit_is_empty_batch():
    w, circuit = cardio_ring()
    for p in list(w.live_portions()):
        w.kill(p.id)
    batch = topology.ring_push(w, circuit)
    assert batch.move_count == 0


def test_full_pulse_conserves_portions_and_occupancy():
    w, circuit = cardio_ring()
    for _ in range(10):
        batch = topology.ring_push(w, circuit)
        topology.commit(w, batch, circuit)
        assert len(w.live_portions("blood")) == 7
        for cid in circuit.order:
            assert len(w.compartments[cid].contents) == 1


def test_pulse_traces_in_circuit_order():
    w, circuit = cardio_ring()
    batch = topology.ring_push(w, circuit)
    record = topology.commit(w, batch, circuit)
    assert record.trace_lines == [
        "pushed LABlood", "pushed LVBlood", "pushed MCBlood", "pushed CCBlood",
        "pushed RABlood", "pushed RVBlood", "pushed ACBlood", "trigger updates",
    ]


def test_circuit_with_unwired_hop_errors_at_staging():
    w, circuit = cardio_ring()
    w.remove_connection("RA", "RV", "fluid")
    with pytest.raises(PushWithoutConnection):
        topology.ring_push(w, circuit)


def test_circuit_definition_requires_edges():
    w = World("w")
    w.define_substance("blood", phase="liquid")
    w.add_compartment("A", "blood_path")
    w.add_compartment("B", "blood_path")
    with pytest.raises(ModelError):
        w.define_circuit("c", ("A", "B"), {"A": ("B",), "B": ("A",)})


# ----------------------------------------------------------------------
# conservation property: |after| = |before| + splits*(fanout-1) - merges*(fanin-1)


@given(data=st.data())
def test_conservation_over_random_batches(data):
    n = data.draw(st.integers(min_value=3, max_value=6), label="compartments")
    w = World("rand")
    w.define_substance("blood", phase="liquid")
    names = [f"N{i}" for i in range(n)]
    for name in names:
        w.add_compartment(name, "blood_path", capacity=1)  # collisions merge
    edges = set()
    for a in names:
        for b in names:
            if a != b and data.draw(st.booleans(), label=f"edge {a}->{b}"):
                w.connect(a, b, "fluid")
                edges.add((a, b))
    occupied = []
    for i, name in enumerate(names):
        if data.draw(st.booleans(), label=f"fill {name}"):
            w.create_portion("blood", entity_id=f"p{i}", compartment=name)
            occupied.append((f"p{i}", name))

    before = len(w.live_portions("blood"))
    batch = MoveBatch()
    split_gain = 0
    for pid, src in occupied:
        dsts = [b for (a, b) in edges if a == src]
        if not dsts:
            continue
        action = data.draw(st.sampled_from(["skip", "move", "split"]), label=f"act {pid}")
        if action == "move":
            topology.stage_move(w, batch, pid, src, dsts[0])
        elif action == "split" and len(dsts) >= 2:
            topology.stage_split(w, batch, pid, src, tuple(dsts[:2]))
            split_gain += 1  # fan-out 2: one extra live portion
    record = topology.commit(w, batch)
    merge_loss = sum(
        len(w.portions[mid].provenance) - 1 for mid in record.merges
    )
    assert len(w.live_portions("blood")) == before + split_gain - merge_loss


def test_atomicity_no_partial_world_after_commit():
    # Every staged move lands in the same commit; positions and contents agree.
    w, circuit = cardio_ring()
    batch = topology.ring_push(w, circuit)
    topology.commit(w, batch, circuit)
    for cid, comp in w.compartments.items():
        for pid in comp.contents:
            assert w.portions[pid].compartment == cid
    for p in w.live_portions():
        assert p.id in w.compartments[p.compartment].contents
