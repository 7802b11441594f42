#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "zkwf/ledger.hpp"
#include "zkwf/participant.hpp"
#include "zkwf/proof.hpp"

using namespace zkwf;
using namespace zkwf::testing;

namespace {

struct Fixture {
  std::shared_ptr<const StatementDescriptor> d = corpus_descriptor("diamond");
  KeyPair alice = KeyPair::from_seed("alice");
  PrivateInputs priv;
  PublicInputs pub;
  Commitment h_new;

  Fixture() {
    auto cur = make_state(*d, {2, 1, 0, 0, 0, 0}, {});
    auto next = make_state(*d, {2, 2, 1, 1, 0, 0}, {});
    priv = {cur, Salt::from_hex("00000001"), next, Salt::from_hex("00000002"), alice.pk, alice.sk};
    pub.h_current = commit(cur, priv.r_current);
    h_new = commit(next, priv.r_new);
    pub.S_new = sign(alice.sk, signature_message(pub.h_current, h_new));
  }
};

class RejectAll final : public ProofBackend {
 public:
  std::string id() const override { return "reject-all"; }
  std::pair<ProverKey, VerifierKey> setup(const StatementDescriptor& d) const override {
    ProverKey pk;
    pk.backendId = id();
    pk.descriptorDigest = d.digest();
    VerifierKey vk;
    static_cast<ProofKey&>(vk) = pk;
    return {pk, vk};
  }
  Proof prove(const ProverKey&, const PrivateInputs& priv, const PublicInputs& pub) const override {
    return {id(), Bytes{1}, {pub.h_current, pub.S_new, commit(priv.s_new, priv.r_new)}};
  }
  bool verify(const VerifierKey&, const PublicBinding&, const Proof&) const override { return false; }
};

}  // namespace

TEST(Proof, SetupIsDeterministicPerDescriptor) {
  auto d = corpus_descriptor("diamond");
  auto [pk1, vk1] = setup(*d, kTransparentBackend);
  auto [pk2, vk2] = setup(*d, kTransparentBackend);
  EXPECT_EQ(serialize_key(pk1), serialize_key(pk2));
  EXPECT_EQ(serialize_key(vk1), serialize_key(vk2));
  auto [pk3, vk3] = setup(*corpus_descriptor("linear"), kTransparentBackend);
  EXPECT_NE(vk1.descriptorDigest, vk3.descriptorDigest);
}

TEST(Proof, UnknownBackend) {
  auto d = corpus_descriptor("diamond");
  EXPECT_THROW(setup(*d, "groth16"), UnknownBackend);
  EXPECT_THROW(BackendRegistry::global().get("nope"), UnknownBackend);
  Fixture f;
  auto [pk, vk] = setup(*f.d, kTransparentBackend);
  auto proof = prove(pk, f.priv, f.pub);
  proof.backendId = "nope";
  EXPECT_FALSE(verify(vk, proof.binding, proof));
}

TEST(Proof, RoundTripAndBinding) {
  Fixture f;
  auto [pk, vk] = setup(*f.d, kTransparentBackend);
  auto proof = prove(pk, f.priv, f.pub);
  EXPECT_EQ(proof.binding.h_new, f.h_new);
  EXPECT_EQ(proof.binding.h_current, f.pub.h_current);
  EXPECT_TRUE(verify(vk, proof.binding, proof));

  auto b = proof.binding;
  b.h_new.data[0] ^= 1;
  EXPECT_FALSE(verify(vk, b, proof));
  b = proof.binding;
  b.h_current.data[5] ^= 1;
  EXPECT_FALSE(verify(vk, b, proof));
  b = proof.binding;
  b.S_new.data[63] ^= 1;
  EXPECT_FALSE(verify(vk, b, proof));

  auto tampered = proof;
  tampered.bytes[tampered.bytes.size() / 2] ^= 1;
  EXPECT_FALSE(verify(vk, tampered.binding, tampered));
  tampered = proof;
  tampered.bytes.clear();
  EXPECT_FALSE(verify(vk, tampered.binding, tampered));
}

TEST(Proof, RefusesRejectedStatement) {
  Fixture f;
  auto [pk, vk] = setup(*f.d, kTransparentBackend);
  auto bob = KeyPair::from_seed("bob");
  auto priv = f.priv;
  priv.pk = bob.pk;
  priv.sk = bob.sk;
  try {
    prove(pk, priv, f.pub);
    FAIL();
  } catch (const StatementRefused& e) {
    EXPECT_EQ(e.reason(), Rejection::BadAuth);
  }
}

TEST(Proof, KeyBoundToDescriptor) {
  Fixture f;
  auto [pk, vk] = setup(*f.d, kTransparentBackend);
  auto proof = prove(pk, f.priv, f.pub);
  auto [pk2, vk2] = setup(*corpus_descriptor("exclusive"), kTransparentBackend);
  EXPECT_FALSE(verify(vk2, proof.binding, proof));
}

TEST(Proof, ReplayAgainstOtherCommitmentFails) {
  Fixture f;
  auto [pk, vk] = setup(*f.d, kTransparentBackend);
  auto proof = prove(pk, f.priv, f.pub);
  PublicBinding moved{proof.binding.h_new, proof.binding.S_new, proof.binding.h_new};
  EXPECT_FALSE(verify(vk, moved, proof));
}

TEST(Proof, CompletenessOverOracleSteps) {
  for (const auto& name : small_corpus()) {
    const Model& m = corpus_model(name);
    auto d = corpus_descriptor(name);
    auto [pk, vk] = setup(*d, kTransparentBackend);
    const std::vector<std::int64_t> vars(d->variables.size(), 0);
    for (const auto& v : reachable_markings(m, *d)) {
      auto cur = make_state(*d, v, vars);
      for (const auto& nv : oracle_step(m, v, vars)) {
        auto next = make_state(*d, nv, vars);
        auto diff = diff_matrix(v, nv);
        auto actor = *key_for(d->owner_of(static_cast<std::size_t>(diff.rows[0].index)));
        PrivateInputs priv{cur, Salt::from_hex("11111111"), next, Salt::from_hex("22222222"), actor.pk, actor.sk};
        PublicInputs pub{commit(cur, priv.r_current), {}};
        pub.S_new = sign(actor.sk, signature_message(pub.h_current, commit(next, priv.r_new)));
        auto proof = prove(pk, priv, pub);
        ASSERT_TRUE(verify(vk, proof.binding, proof)) << name;
      }
    }
  }
}

TEST(Proof, SerializationRoundTrip) {
  Fixture f;
  auto [pk, vk] = setup(*f.d, kTransparentBackend);
  auto proof = prove(pk, f.priv, f.pub);
  EXPECT_EQ(parse_proof(serialize_proof(proof)), proof);
  ProofKey k = vk;
  EXPECT_EQ(parse_key(serialize_key(vk)), k);
  auto bytes = serialize_proof(proof);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(parse_proof(bytes), ProofError);
  EXPECT_THROW(parse_key(Bytes{0, 0, 0, 9, 1}), ProofError);
}

TEST(Proof, BackendSwapReachesProtocolUnchanged) {
  if (!BackendRegistry::global().contains("reject-all")) {
    BackendRegistry::global().add(std::make_shared<RejectAll>());
  }
  auto d = corpus_descriptor("diamond");
  Ledger ledger;
  SeededRandom rng(1);
  ParticipantEngine alice({KeyPair::from_seed("alice"), rng.fixed<32, SymmetricKeyTag>(), d, "reject-all"}, ledger,
                          rng);
  auto id = alice.deploy();
  auto out = alice.step(id, StepAction::start("s"));
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(ledger.get_history(id).size(), 1u);
}
