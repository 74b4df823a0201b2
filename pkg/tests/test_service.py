"""Review service: REST contract, decision lifecycle, event-sourcing."""

from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from conftest import REACTOR_TEXT
from eakit.llm.providers import CannedProvider, ProviderError
from eakit.prose import serialize
from eakit.service.app import create_app
from eakit.service.store import (
    FileStore,
    RevisionConflict,
    UnknownArgument,
    replay_decisions,
)

UNDERMINING_DOC = (
    "E1 [Evidence]: Endurance log showing no failures\n"
    "UM1 [Undermining]: But the rig differs from the plant\n"
    "E1 -> UM1\n"
)

ILLEGAL_DOC = (
    "Cx1 [Context]: scope\n"
    "E1 [Evidence]: Log showing things\n"
    "Cx1 -> E1\n"
)


@pytest.fixture
def store(tmp_path) -> FileStore:
    return FileStore(tmp_path / "data")


@pytest.fixture
def client(store) -> TestClient:
    return TestClient(create_app(store))


def upload(client: TestClient, text: str = REACTOR_TEXT) -> str:
    response = client.post("/arguments", content=text.encode("utf-8"))
    assert response.status_code == 201, response.text
    return response.json()["argument_id"]


class TestCreateAndRead:
    def test_fresh_store_lists_empty(self, client):
        response = client.get("/arguments")
        assert response.status_code == 200
        assert response.json() == []

    def test_create_happy_path(self, client):
        response = client.post("/arguments", content=REACTOR_TEXT.encode("utf-8"))
        assert response.status_code == 201
        body = response.json()
        assert body["revision"] == 1
        assert body["diagnostics"] == []
        assert response.headers["etag"] == '"1"'

    def test_parse_failure_400(self, client):
        response = client.post("/arguments", content=b"C1 [Blob]: x")
        assert response.status_code == 400
        assert response.json()["errors"][0]["code"] == "BadKind"

    def test_structural_errors_stored_but_422(self, client):
        response = client.post("/arguments", content=ILLEGAL_DOC.encode("utf-8"))
        assert response.status_code == 422
        body = response.json()
        assert any(d["code"] == "S001" for d in body["diagnostics"])
        # stored anyway
        fetched = client.get(f"/arguments/{body['argument_id']}")
        assert fetched.status_code == 200

    def test_get_argument(self, client):
        argument_id = upload(client)
        response = client.get(f"/arguments/{argument_id}")
        assert response.status_code == 200
        body = response.json()
        assert body["revision"] == 1
        assert len(body["argument"]["elements"]) == 7
        assert response.headers["etag"] == '"1"'

    def test_get_diagnostics(self, client):
        argument_id = upload(client)
        response = client.get(f"/arguments/{argument_id}/diagnostics")
        assert response.status_code == 200
        assert response.json() == []

    def test_get_coverage(self, client):
        argument_id = upload(client)
        response = client.get(f"/arguments/{argument_id}/coverage")
        assert response.status_code == 200
        assert response.json()["unresolved_defeaters"] == ["UC1", "UM1"]

    def test_coverage_blocked_by_structural_errors(self, client):
        response = client.post("/arguments", content=ILLEGAL_DOC.encode("utf-8"))
        argument_id = response.json()["argument_id"]
        response = client.get(f"/arguments/{argument_id}/coverage")
        assert response.status_code == 422

    def test_unknown_argument_404(self, client):
        for path in (
            "/arguments/zzz",
            "/arguments/zzz/diagnostics",
            "/arguments/zzz/coverage",
            "/arguments/zzz/log",
        ):
            assert client.get(path).status_code == 404


class TestCandidates:
    def test_request_candidates(self, client):
        argument_id = upload(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "C1", "kind": "rebutting"},
        )
        assert response.status_code == 201
        body = response.json()
        assert body["revision"] == 2
        assert len(body["candidates"]) == 3
        assert all(c["status"] == "Proposed" for c in body["candidates"])

    def test_kind_mismatch_409(self, client):
        argument_id = upload(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "E1", "kind": "rebutting"},
        )
        assert response.status_code == 409

    def test_unknown_argument_404(self, client):
        response = client.post(
            "/arguments/zzz/candidates", json={"target": "C1", "kind": "rebutting"}
        )
        assert response.status_code == 404

    def test_unknown_target_404(self, client):
        argument_id = upload(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "C99", "kind": "rebutting"},
        )
        assert response.status_code == 404

    def test_provider_failure_502(self, store):
        def explode(request):
            raise ProviderError("no backend")

        class Exploding:
            def complete(self, request):
                raise ProviderError("no backend")

        client = TestClient(create_app(store, provider=Exploding()))
        argument_id = upload(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "C1", "kind": "rebutting"},
        )
        assert response.status_code == 502

    def test_ids_unique_across_rounds(self, client):
        argument_id = upload(client)
        first = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "C1", "kind": "rebutting"},
        ).json()["candidates"]
        second = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "C1", "kind": "rebutting"},
        ).json()["candidates"]
        ids = [c["id"] for c in first + second]
        assert len(ids) == len(set(ids)) == 6


class TestDecisions:
    def _setup(self, client, target="C1", kind="rebutting"):
        argument_id = upload(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": target, "kind": kind},
        )
        return argument_id, response.json()["candidates"]

    def test_accept_grafts(self, client):
        argument_id, candidates = self._setup(client)
        candidate_id = candidates[0]["id"]
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidate_id}/decision",
            json={"action": "Accept"},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["revision"] == 3
        element_ids = {e["id"] for e in body["argument"]["elements"]}
        assert candidate_id in element_ids
        assert ["C1", candidate_id] in body["argument"]["edges"]
        assert body["candidate"]["status"] == "Accepted"

    def test_reject_only_logs(self, client):
        argument_id, candidates = self._setup(client)
        candidate_id = candidates[0]["id"]
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidate_id}/decision",
            json={"action": "Reject"},
        )
        assert response.status_code == 200
        body = response.json()
        assert candidate_id not in {e["id"] for e in body["argument"]["elements"]}
        log = client.get(f"/arguments/{argument_id}/log").json()
        assert [entry["action"] for entry in log] == ["Reject"]

    def test_refine_with_valid_text(self, client):
        argument_id, candidates = self._setup(client)
        candidate_id = candidates[0]["id"]
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidate_id}/decision",
            json={"action": "Refine", "edited_text": "Unless the edited doubt holds"},
        )
        assert response.status_code == 200
        body = response.json()
        texts = {e["id"]: e["text"] for e in body["argument"]["elements"]}
        assert texts[candidate_id] == "Unless the edited doubt holds"
        assert body["candidate"]["status"] == "Refined"
        assert body["candidate"]["refined_text"] == "Unless the edited doubt holds"

    def test_refine_missing_prefix_422(self, store):
        client = TestClient(create_app(store))
        response = client.post(
            "/arguments", content=UNDERMINING_DOC.encode("utf-8")
        )
        argument_id = response.json()["argument_id"]
        candidates = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "E1", "kind": "undermining"},
        ).json()["candidates"]
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidates[0]['id']}/decision",
            json={"action": "Refine", "edited_text": "The data is stale"},
        )
        assert response.status_code == 422
        assert any(d["code"] == "M003" for d in response.json()["diagnostics"])

    def test_accept_with_bad_text_422(self, store):
        bad_provider = CannedProvider(fallback=lambda req: "1. Missing the prefix")
        client = TestClient(create_app(store, provider=bad_provider))
        argument_id = upload(client)
        candidates = client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "C1", "kind": "rebutting"},
        ).json()["candidates"]
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidates[0]['id']}/decision",
            json={"action": "Accept"},
        )
        assert response.status_code == 422
        assert any(d["code"] == "M001" for d in response.json()["diagnostics"])

    def test_refine_requires_text(self, client):
        argument_id, candidates = self._setup(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidates[0]['id']}/decision",
            json={"action": "Refine"},
        )
        assert response.status_code == 422

    def test_second_decision_409(self, client):
        argument_id, candidates = self._setup(client)
        candidate_id = candidates[0]["id"]
        url = f"/arguments/{argument_id}/candidates/{candidate_id}/decision"
        assert client.post(url, json={"action": "Accept"}).status_code == 200
        assert client.post(url, json={"action": "Reject"}).status_code == 409

    def test_unknown_candidate_404(self, client):
        argument_id = upload(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates/nope/decision",
            json={"action": "Accept"},
        )
        assert response.status_code == 404

    def test_stale_if_match_409(self, client):
        argument_id, candidates = self._setup(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidates[0]['id']}/decision",
            json={"action": "Accept"},
            headers={"If-Match": '"1"'},  # stale: candidates bumped it to 2
        )
        assert response.status_code == 409
        assert response.json()["revision"] == 2

    def test_matching_if_match_succeeds(self, client):
        argument_id, candidates = self._setup(client)
        response = client.post(
            f"/arguments/{argument_id}/candidates/{candidates[0]['id']}/decision",
            json={"action": "Accept"},
            headers={"If-Match": '"2"'},
        )
        assert response.status_code == 200

    def test_no_new_structural_findings_after_accept(self, client, store):
        argument_id, candidates = self._setup(client)
        client.post(
            f"/arguments/{argument_id}/candidates/{candidates[0]['id']}/decision",
            json={"action": "Accept"},
        )
        from eakit.rules import validate

        stored = store.get(argument_id)
        assert [d for d in validate(stored.argument) if d.code.startswith("S")] == []


class TestEventSourcing:
    def test_replay_reproduces_argument(self, client, store):
        argument_id = upload(client)
        for kind, target in (("rebutting", "C1"), ("undermining", "E1")):
            client.post(
                f"/arguments/{argument_id}/candidates",
                json={"target": target, "kind": kind},
            )
        stored = store.get(argument_id)
        actions = ["Accept", "Reject", "Refine"]
        for candidate, action in zip(stored.candidates, actions):
            payload = {"action": action}
            if action == "Refine":
                payload["edited_text"] = (
                    "Unless replayed edits survive"
                    if candidate.kind.value == "RebuttingDefeater"
                    else "But replayed edits survive"
                )
            response = client.post(
                f"/arguments/{argument_id}/candidates/{candidate.id}/decision",
                json=payload,
            )
            assert response.status_code == 200

        stored = store.get(argument_id)
        replayed = replay_decisions(
            stored.initial_argument, stored.candidates, stored.decision_log
        )
        assert serialize(replayed) == serialize(stored.argument)

    def test_decision_log_append_only(self, client, store):
        argument_id, candidates = TestDecisions()._setup(self_client := client)
        for candidate, action in zip(candidates[:2], ("Accept", "Reject")):
            client.post(
                f"/arguments/{argument_id}/candidates/{candidate['id']}/decision",
                json={"action": action},
            )
        log = client.get(f"/arguments/{argument_id}/log").json()
        assert [entry["action"] for entry in log] == ["Accept", "Reject"]
        assert all("timestamp" in entry for entry in log)


class TestConcurrency:
    def test_one_winner_per_candidate(self, client):
        argument_id, candidates = TestDecisions()._setup(client)
        candidate_id = candidates[0]["id"]
        url = f"/arguments/{argument_id}/candidates/{candidate_id}/decision"
        statuses = []
        barrier = threading.Barrier(2)

        def decide(action):
            barrier.wait()
            response = client.post(url, json={"action": action})
            statuses.append(response.status_code)

        threads = [
            threading.Thread(target=decide, args=(action,))
            for action in ("Accept", "Reject")
        ]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert sorted(statuses) == [200, 409]


class TestStoreDirect:
    def test_persistence_across_instances(self, tmp_path, client, store):
        argument_id = upload(client)
        fresh = FileStore(store.data_dir)
        stored = fresh.get(argument_id)
        assert stored.revision == 1
        assert stored.argument.element_count == 7

    def test_unknown_argument(self, store):
        with pytest.raises(UnknownArgument):
            store.get("missing")

    def test_revision_conflict(self, store, client):
        argument_id = upload(client)
        with pytest.raises(RevisionConflict):
            store.mutate(argument_id, lambda s: s, expected_revision=5)

    def test_no_temp_files_left(self, store, client):
        argument_id = upload(client)
        client.post(
            f"/arguments/{argument_id}/candidates",
            json={"target": "C1", "kind": "rebutting"},
        )
        leftovers = [p for p in store.data_dir.iterdir() if p.name.startswith(".tmp")]
        assert leftovers == []
