import pytest

from repackbench.categories import category_index
from repackbench.corpus import (
    BENIGN,
    CFG,
    ApiCallId,
    Block,
    CorpusConfig,
    Edge,
    Manifest,
    PayloadSpec,
    SyntheticApp,
    Trigger,
    generate_corpus,
    inject_payload,
)

SMS = ApiCallId.of(category_index("android.telephony.SmsManager"), "sendTextMessage")
CIPHER = ApiCallId.of(category_index("javax.crypto.Cipher"), "doFinal")


def call(category: str, method: str) -> ApiCallId:
    return ApiCallId.of(category_index(category), method)


def manifest(**kw) -> Manifest:
    base = dict(min_sdk=9, max_sdk=23, n_activities=1, n_services=0, n_receivers=0, n_providers=0)
    base.update(kw)
    return Manifest(**base)


def chain_app(emits, app_id="chain", **manifest_kw) -> SyntheticApp:
    """Benign app whose blocks 0..n-1 form a single chain."""
    blocks = tuple(Block(i, tuple(e)) for i, e in enumerate(emits))
    edges = tuple(Edge(i, i + 1) for i in range(len(emits) - 1))
    return SyntheticApp(app_id, manifest(**manifest_kw), CFG(0, blocks, edges), BENIGN)


def graft(base: SyntheticApp, trigger: Trigger, at: int = 0, payload_calls=(SMS,)) -> SyntheticApp:
    first = max(base.cfg.block_ids()) + 1
    blocks = tuple(Block(first + i, (c,)) for i, c in enumerate(payload_calls))
    return inject_payload(base, PayloadSpec(blocks, at, trigger))


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(CorpusConfig(n_benign=30, n_malicious=30), 11)


@pytest.fixture(scope="session")
def default_corpus():
    return generate_corpus(CorpusConfig(), 7)
