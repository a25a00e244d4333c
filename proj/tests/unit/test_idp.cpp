#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <nlohmann/json.hpp>

#include "poa/common/bigint.hpp"
#include "poa/common/error.hpp"
#include "poa/common/random.hpp"
#include "poa/idp/idp_sim.hpp"

using namespace poa;

namespace {

idp::TokenRequest request(std::string sub = "alice@example.com") {
  idp::TokenRequest r;
  r.sub = std::move(sub);
  r.aud = "poa-ca";
  r.lifetime = 300;
  return r;
}

}  // namespace

TEST(GenerateRsa, ParameterEcho) {
  SeededRandom rng(1);
  const idp::RsaPrivateKey k = idp::generate_rsa(2048, 65537, rng);
  EXPECT_EQ(bit_length(k.pub.modulus), 2048u);
  EXPECT_EQ(k.pub.exponent, 65537);
  EXPECT_EQ(k.pub.key_id, idp::key_id_for(k.pub.modulus, k.pub.exponent));
  EXPECT_EQ(k.pub.key_id.size(), 64u);
}

TEST(GenerateRsa, PrivateExponentInvertsPublicModLcm) {
  SeededRandom rng(2);
  for (unsigned long e : {3ul, 7ul, 65537ul}) {
    for (int i = 0; i < 3; ++i) {
      const idp::RsaPrivateKey k = idp::generate_rsa(512, e, rng);
      EXPECT_EQ(mpz_class(k.p * k.q), k.pub.modulus);
      EXPECT_NE(mpz_probab_prime_p(k.p.get_mpz_t(), 30), 0);
      EXPECT_NE(mpz_probab_prime_p(k.q.get_mpz_t(), 30), 0);
      mpz_class lcm;
      const mpz_class p1 = k.p - 1;
      const mpz_class q1 = k.q - 1;
      mpz_lcm(lcm.get_mpz_t(), p1.get_mpz_t(), q1.get_mpz_t());
      EXPECT_EQ(mpz_class((k.d * k.pub.exponent) % lcm), 1) << "e=" << e;
      // Round trip through raw RSA.
      const mpz_class m = rng.uniform(k.pub.modulus);
      EXPECT_EQ(powm(k.sign_raw(m), k.pub.exponent, k.pub.modulus), m);
    }
  }
}

TEST(GenerateRsa, SeededIsReproducible) {
  SeededRandom a(5);
  SeededRandom b(5);
  EXPECT_EQ(idp::generate_rsa(512, 7, a).pub, idp::generate_rsa(512, 7, b).pub);
}

TEST(IdentityProvider, ToyExponentThreeTokensVerify) {
  idp::IdentityProvider idp("https://idp.example", 512, 3, std::make_shared<SeededRandom>(3));
  const idp::IssuedToken t = idp.issue_token(request(), 100);
  EXPECT_EQ(jose::verify_rs256(idp.active_keys(), t.token), jose::Rs256Verdict::kAccept);
}

TEST(IdentityProvider, IssueSetsStandardClaims) {
  idp::IdentityProvider idp("https://idp.example", 512, 65537, std::make_shared<SeededRandom>(3));
  idp::TokenRequest r = request();
  r.nonce = "abc";
  r.email = "alice@example.com";
  const idp::IssuedToken t = idp.issue_token(r, 1000);
  EXPECT_EQ(t.token.claims.iss, "https://idp.example");
  EXPECT_EQ(t.token.claims.iat, 1000);
  EXPECT_EQ(t.token.claims.exp, 1300);
  EXPECT_EQ(t.token.claims.aud, std::vector<std::string>{"poa-ca"});
  EXPECT_EQ(t.token.claims.nonce, "abc");
  EXPECT_EQ(t.token.claims.email, "alice@example.com");
  EXPECT_EQ(t.token.header.kid, idp.signing_public_key().key_id);
  EXPECT_EQ(jose::parse_compact(t.compact).signing_input, t.token.signing_input);
  r.lifetime = 0;
  EXPECT_THROW(idp.issue_token(r, 1000), Error);
}

TEST(IdentityProvider, SignaturesAreDeterministic) {
  idp::IdentityProvider idp("https://idp.example", 512, 65537, std::make_shared<SeededRandom>(3));
  const idp::IssuedToken a = idp.issue_token(request(), 1000);
  const idp::IssuedToken b = idp.issue_token(request(), 1000);
  const idp::IssuedToken c = idp.issue_token(request(), 1001);
  EXPECT_EQ(a.compact, b.compact);
  EXPECT_EQ(a.token.signature_bytes, b.token.signature_bytes);
  EXPECT_NE(a.token.signature_bytes, c.token.signature_bytes);
}

TEST(IdentityProvider, RotationRetiresOldKey) {
  idp::IdentityProvider idp("https://idp.example", 512, 65537, std::make_shared<SeededRandom>(3));
  const idp::IssuedToken before = idp.issue_token(request(), 1000);
  const std::string old_kid = idp.signing_public_key().key_id;
  const jose::Jwks old_jwks = idp.active_keys();
  EXPECT_EQ(idp.rotation_counter(), 0u);
  idp.rotate(2000);
  EXPECT_EQ(idp.rotation_counter(), 1u);
  const jose::Jwks now = idp.active_keys();
  ASSERT_EQ(now.keys.size(), 1u);
  EXPECT_NE(now.keys.front().key_id, old_kid);
  EXPECT_EQ(jose::verify_rs256(now, before.token), jose::Rs256Verdict::kKeyNotFound);
  EXPECT_EQ(jose::verify_rs256(old_jwks, before.token), jose::Rs256Verdict::kAccept);
  ASSERT_EQ(idp.retired_keys().size(), 1u);
  EXPECT_EQ(idp.retired_keys().front().retired_at, 2000);
  EXPECT_TRUE(idp.retired_keys().front().keys.same_keys(old_jwks));
  const idp::IssuedToken after = idp.issue_token(request(), 2001);
  EXPECT_EQ(jose::verify_rs256(now, after.token), jose::Rs256Verdict::kAccept);
  EXPECT_EQ(jose::verify_rs256(old_jwks, after.token), jose::Rs256Verdict::kKeyNotFound);
}

TEST(IdentityProvider, TokensNeverVerifyAgainstLaterKeySets) {
  idp::IdentityProvider idp("https://idp.example", 512, 7, std::make_shared<SeededRandom>(9));
  std::vector<idp::IssuedToken> tokens;
  for (int i = 0; i < 5; ++i) {
    tokens.push_back(idp.issue_token(request(), 1000 + i));
    idp.rotate(1000 + i);
    for (const auto& t : tokens) {
      EXPECT_NE(jose::verify_rs256(idp.active_keys(), t.token), jose::Rs256Verdict::kAccept);
    }
  }
}

TEST(IdentityProvider, JwksDocumentIsByteStableBetweenRotations) {
  idp::IdentityProvider idp("https://idp.example", 512, 65537, std::make_shared<SeededRandom>(3));
  const std::string a = idp.jwks_document();
  idp.issue_token(request(), 10);
  EXPECT_EQ(a, idp.jwks_document());
  EXPECT_EQ(a, idp.active_keys().to_json());
  idp.rotate(20);
  EXPECT_NE(a, idp.jwks_document());
  EXPECT_TRUE(idp.fetch_jwks("https://idp.example").same_keys(idp.active_keys()));
}

TEST(IdentityProvider, DiscoveryDocument) {
  idp::IdentityProvider idp("https://idp.example", 512, 65537, std::make_shared<SeededRandom>(3));
  const auto doc = nlohmann::json::parse(idp.discovery_document("https://idp.example/jwks"));
  EXPECT_EQ(doc.at("issuer"), "https://idp.example");
  EXPECT_EQ(doc.at("jwks_uri"), "https://idp.example/jwks");
}

TEST(IdentityProvider, ConcurrentIssueAndRotate) {
  idp::IdentityProvider idp("https://idp.example", 512, 7, std::make_shared<SeededRandom>(3));
  std::atomic<int> bad{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        const idp::IssuedToken tok = idp.issue_token(request("u" + std::to_string(t)), 100 + i);
        // The signing key must be in the set current at issuance or retired later.
        bool found = idp.active_keys().find(tok.token.header.kid) != nullptr;
        for (const auto& r : idp.retired_keys()) found = found || r.keys.find(tok.token.header.kid) != nullptr;
        if (!found) ++bad;
      }
    });
  }
  for (int i = 0; i < 10; ++i) idp.rotate(100 + i);
  for (auto& th : threads) th.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_EQ(idp.rotation_counter(), 10u);
}
