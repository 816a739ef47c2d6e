"""Deterministic regeneration of fixture corpora from manifest parameters.

Shared by the fixture pre-run script (which records oracle expectations) and
the acceptance tests (which must see byte-identical data), so the generation
code lives in exactly one place.
"""

from surpmark import EmissionSpec, SurprisalRecord, sample_surprisals
from surpmark._rng import make_rng

SIDE_IDS = {"machine": 0, "human": 1}
ROLE_IDS = {"ref": 0, "test": 1}
DETECTION_STREAM = 50


def detection_docs(sources, manifest, side, role):
    """Gaussian-emission documents for one (side, role) of the detection task.

    ``sources`` maps side -> EmissionSpec; document i draws from the stream
    (seed, 50, side_id, role_id, i), so every cell is independently
    reproducible.
    """
    spec = sources[side]
    count = manifest["ref_docs_per_side" if role == "ref" else "test_docs_per_side"]
    length = manifest["doc_length"]
    seed = manifest["seed"]
    docs = []
    for i in range(count):
        rng = make_rng(seed, DETECTION_STREAM, SIDE_IDS[side], ROLE_IDS[role], i)
        docs.append(SurprisalRecord(id=f"{side}-{role}-{i}",
                                    surprisals=sample_surprisals(spec, length, rng),
                                    label=side))
    return docs


def load_sources(emission_pair):
    return {"machine": EmissionSpec.from_dict(emission_pair["source_machine"]),
            "human": EmissionSpec.from_dict(emission_pair["source_human"])}
