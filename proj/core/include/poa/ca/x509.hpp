#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "poa/common/bytes.hpp"
#include "poa/common/signing.hpp"

typedef struct x509_st X509;

namespace poa::ca {

// Private-use arc; a deployment would register real OIDs.
struct PoaOids {
  std::string signing_input = "1.3.9901";
  std::string proof = "1.3.9902";
  std::string issuer = "1.3.9903";
  std::string sct = "1.3.9904";
};

enum class SanType { kEmail, kUri };

/// Certificate fields derived from token claims by the public mapping rule.
struct SubjectFields {
  SanType san_type = SanType::kUri;
  std::string san_value;
  std::string issuer;
  int64_t not_before = 0;
  int64_t not_after = 0;

  bool operator==(const SubjectFields&) const = default;
};

// DER of the SubjectAltName extnValue (a GeneralNames SEQUENCE).
Bytes encode_san(SanType type, const std::string& value);

struct X509Deleter {
  void operator()(X509* x) const;
};

/// Owning wrapper over a parsed X.509 certificate.
class Certificate {
 public:
  Certificate() = default;
  explicit Certificate(X509* x);

  // Throws kMalformed on anything that is not exactly one DER certificate.
  static Certificate from_der(ByteView der);
  static Certificate from_pem(std::string_view pem);

  bool valid() const { return x_ != nullptr; }
  X509* get() const { return x_.get(); }

  Bytes der() const;
  std::string pem() const;

  // Contents of the extension's extnValue OCTET STRING. Throws kMalformed if
  // the extension occurs more than once.
  std::optional<Bytes> extension(const std::string& oid) const;
  bool extension_critical(const std::string& oid) const;

  int64_t not_before() const;
  int64_t not_after() const;
  Bytes subject_public_key() const;
  bool subject_name_empty() const;
  bool issued_by(const Certificate& issuer) const;
  bool verify_signature(const VerifyingKey& key) const;

  // TBSCertificate re-encoded with the given extension removed: the
  // precertificate the CT log signed.
  Bytes tbs_without(const std::string& oid) const;

 private:
  std::shared_ptr<X509> x_;
};

std::string der_to_pem(ByteView der);
Bytes pem_to_der(std::string_view pem);

/// Everything a CA puts into a leaf certificate. Used by the honest CA and
/// by the games harness to build rogue certificates with a stolen CA key.
struct LeafContents {
  SubjectFields fields;
  Bytes subject_spki;
  Bytes serial;
  std::optional<std::string> signing_input;  // 1.3.9901
  std::optional<Bytes> proof;                // 1.3.9902
  PoaOids oids;
};

/// Builds and signs the precertificate (no SCT extension).
Certificate build_precertificate(const LeafContents& contents, const Certificate& root,
                                 const SigningKey& ca_key);

/// Appends the SCT extension to a precertificate and re-signs it.
Certificate attach_sct(const Certificate& precert, ByteView sct_wire, const std::string& sct_oid,
                       const SigningKey& ca_key);

/// Self-signed CA root with O=poa and the given CN.
Certificate make_root(const SigningKey& ca_key, int64_t not_before, int64_t lifetime_seconds,
                      const std::string& common_name = "poa-ca");

// TBS bytes of a certificate as currently encoded.
Bytes tbs_bytes(const Certificate& cert);

}  // namespace poa::ca
