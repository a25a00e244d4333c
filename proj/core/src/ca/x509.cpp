#include "poa/ca/x509.hpp"

#include <ctime>

#include <openssl/bio.h>
#include <openssl/evp.h>
#include <openssl/objects.h>
#include <openssl/pem.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include "poa/common/error.hpp"

namespace poa::ca {
namespace {

struct ObjDeleter {
  void operator()(ASN1_OBJECT* o) const { ASN1_OBJECT_free(o); }
};
using ObjPtr = std::unique_ptr<ASN1_OBJECT, ObjDeleter>;

ObjPtr oid_object(const std::string& oid) {
  ObjPtr obj(OBJ_txt2obj(oid.c_str(), 1));
  if (!obj) fail(ErrorCode::kInvalidArgument, "invalid OID " + oid);
  return obj;
}

int find_extension(X509* x, const std::string& oid) {
  ObjPtr obj = oid_object(oid);
  const int idx = X509_get_ext_by_OBJ(x, obj.get(), -1);
  if (idx >= 0 && X509_get_ext_by_OBJ(x, obj.get(), idx) >= 0) {
    fail(ErrorCode::kMalformed, "duplicate extension " + oid);
  }
  return idx;
}

void add_raw_extension(X509* x, const std::string& oid, ByteView value, bool critical) {
  ObjPtr obj = oid_object(oid);
  ASN1_OCTET_STRING* os = ASN1_OCTET_STRING_new();
  ASN1_OCTET_STRING_set(os, value.data(), static_cast<int>(value.size()));
  X509_EXTENSION* ext = X509_EXTENSION_create_by_OBJ(nullptr, obj.get(), critical ? 1 : 0, os);
  ASN1_OCTET_STRING_free(os);
  if (ext == nullptr || X509_add_ext(x, ext, -1) != 1) {
    X509_EXTENSION_free(ext);
    fail(ErrorCode::kCrypto, "cannot add extension " + oid);
  }
  X509_EXTENSION_free(ext);
}

void add_nid_extension(X509* x, int nid, const char* value) {
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, x, x, nullptr, nullptr, 0);
  X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid, value);
  if (ext == nullptr || X509_add_ext(x, ext, -1) != 1) {
    X509_EXTENSION_free(ext);
    fail(ErrorCode::kCrypto, "cannot add standard extension");
  }
  X509_EXTENSION_free(ext);
}

int64_t asn1_time_to_unix(const ASN1_TIME* t) {
  std::tm tm{};
  if (t == nullptr || ASN1_TIME_to_tm(t, &tm) != 1) fail(ErrorCode::kMalformed, "bad certificate time");
  return static_cast<int64_t>(timegm(&tm));
}

void set_serial(X509* x, ByteView serial) {
  BIGNUM* bn = BN_bin2bn(serial.data(), static_cast<int>(serial.size()), nullptr);
  ASN1_INTEGER* ai = BN_to_ASN1_INTEGER(bn, nullptr);
  X509_set_serialNumber(x, ai);
  ASN1_INTEGER_free(ai);
  BN_free(bn);
}

void sign_or_throw(X509* x, const SigningKey& key) {
  if (X509_sign(x, key.get(), EVP_sha256()) <= 0) fail(ErrorCode::kCrypto, "certificate signing failed");
}

Bytes i2d_cert(X509* x) {
  unsigned char* buf = nullptr;
  const int len = i2d_X509(x, &buf);
  if (len <= 0) fail(ErrorCode::kCrypto, "cannot encode certificate");
  Bytes out(buf, buf + len);
  OPENSSL_free(buf);
  return out;
}

}  // namespace

void X509Deleter::operator()(X509* x) const {
  X509_free(x);
}

Certificate::Certificate(X509* x) : x_(x, X509Deleter{}) {}

Certificate Certificate::from_der(ByteView der) {
  const unsigned char* p = der.data();
  X509* x = d2i_X509(nullptr, &p, static_cast<long>(der.size()));
  if (x == nullptr || p != der.data() + der.size()) {
    X509_free(x);
    fail(ErrorCode::kMalformed, "not a DER certificate");
  }
  return Certificate(x);
}

Certificate Certificate::from_pem(std::string_view pem) {
  return from_der(pem_to_der(pem));
}

Bytes Certificate::der() const {
  return i2d_cert(x_.get());
}

std::string Certificate::pem() const {
  return der_to_pem(der());
}

std::optional<Bytes> Certificate::extension(const std::string& oid) const {
  const int idx = find_extension(x_.get(), oid);
  if (idx < 0) return std::nullopt;
  const ASN1_OCTET_STRING* data = X509_EXTENSION_get_data(X509_get_ext(x_.get(), idx));
  return Bytes(data->data, data->data + data->length);
}

bool Certificate::extension_critical(const std::string& oid) const {
  const int idx = find_extension(x_.get(), oid);
  return idx >= 0 && X509_EXTENSION_get_critical(X509_get_ext(x_.get(), idx)) == 1;
}

int64_t Certificate::not_before() const {
  return asn1_time_to_unix(X509_get0_notBefore(x_.get()));
}

int64_t Certificate::not_after() const {
  return asn1_time_to_unix(X509_get0_notAfter(x_.get()));
}

Bytes Certificate::subject_public_key() const {
  EVP_PKEY* key = X509_get0_pubkey(x_.get());
  if (key == nullptr) fail(ErrorCode::kMalformed, "certificate has no usable public key");
  unsigned char* buf = nullptr;
  const int len = i2d_PUBKEY(key, &buf);
  if (len <= 0) fail(ErrorCode::kMalformed, "cannot encode subject public key");
  Bytes out(buf, buf + len);
  OPENSSL_free(buf);
  return out;
}

bool Certificate::subject_name_empty() const {
  return X509_NAME_entry_count(X509_get_subject_name(x_.get())) == 0;
}

bool Certificate::issued_by(const Certificate& issuer) const {
  return X509_NAME_cmp(X509_get_issuer_name(x_.get()), X509_get_subject_name(issuer.get())) == 0;
}

bool Certificate::verify_signature(const VerifyingKey& key) const {
  return X509_verify(x_.get(), key.get()) == 1;
}

Bytes Certificate::tbs_without(const std::string& oid) const {
  // Work on a copy: re-encoding marks the TBS modified, which would make
  // later signature checks on this object use the re-encoded bytes.
  X509* copy = X509_dup(x_.get());
  if (copy == nullptr) fail(ErrorCode::kCrypto, "cannot copy certificate");
  Certificate holder(copy);
  const int idx = find_extension(copy, oid);
  if (idx >= 0) X509_EXTENSION_free(X509_delete_ext(copy, idx));
  unsigned char* buf = nullptr;
  const int len = i2d_re_X509_tbs(copy, &buf);
  if (len <= 0) fail(ErrorCode::kCrypto, "cannot encode TBSCertificate");
  Bytes out(buf, buf + len);
  OPENSSL_free(buf);
  return out;
}

Bytes tbs_bytes(const Certificate& cert) {
  X509* copy = X509_dup(cert.get());
  if (copy == nullptr) fail(ErrorCode::kCrypto, "cannot copy certificate");
  Certificate holder(copy);
  unsigned char* buf = nullptr;
  const int n = i2d_re_X509_tbs(copy, &buf);
  if (n <= 0) fail(ErrorCode::kCrypto, "cannot encode TBSCertificate");
  Bytes out(buf, buf + n);
  OPENSSL_free(buf);
  return out;
}

std::string der_to_pem(ByteView der) {
  std::string b64 = base64_encode(der);
  std::string out = "-----BEGIN CERTIFICATE-----\n";
  for (size_t i = 0; i < b64.size(); i += 64) out += b64.substr(i, 64) + "\n";
  out += "-----END CERTIFICATE-----\n";
  return out;
}

Bytes pem_to_der(std::string_view pem) {
  constexpr std::string_view kBegin = "-----BEGIN CERTIFICATE-----";
  constexpr std::string_view kEnd = "-----END CERTIFICATE-----";
  const size_t b = pem.find(kBegin);
  if (b == std::string_view::npos) fail(ErrorCode::kMalformed, "no PEM certificate header");
  const size_t e = pem.find(kEnd, b);
  if (e == std::string_view::npos) fail(ErrorCode::kMalformed, "truncated PEM certificate");
  try {
    return base64_decode(pem.substr(b + kBegin.size(), e - b - kBegin.size()));
  } catch (const Error&) {
    fail(ErrorCode::kMalformed, "PEM body is not base64");
  }
}

Bytes encode_san(SanType type, const std::string& value) {
  GENERAL_NAMES* names = GENERAL_NAMES_new();
  GENERAL_NAME* name = GENERAL_NAME_new();
  ASN1_IA5STRING* ia5 = ASN1_IA5STRING_new();
  ASN1_STRING_set(ia5, value.data(), static_cast<int>(value.size()));
  GENERAL_NAME_set0_value(name, type == SanType::kEmail ? GEN_EMAIL : GEN_URI, ia5);
  sk_GENERAL_NAME_push(names, name);
  unsigned char* buf = nullptr;
  const int len = i2d_GENERAL_NAMES(names, &buf);
  GENERAL_NAMES_free(names);
  if (len <= 0) fail(ErrorCode::kCrypto, "cannot encode SubjectAltName");
  Bytes out(buf, buf + len);
  OPENSSL_free(buf);
  return out;
}

Certificate build_precertificate(const LeafContents& contents, const Certificate& root,
                                 const SigningKey& ca_key) {
  Certificate cert(X509_new());
  X509* x = cert.get();
  X509_set_version(x, 2);
  set_serial(x, contents.serial);
  X509_set_issuer_name(x, X509_get_subject_name(root.get()));
  ASN1_TIME_set(X509_getm_notBefore(x), static_cast<time_t>(contents.fields.not_before));
  ASN1_TIME_set(X509_getm_notAfter(x), static_cast<time_t>(contents.fields.not_after));

  const unsigned char* p = contents.subject_spki.data();
  EVP_PKEY* subject_key = d2i_PUBKEY(nullptr, &p, static_cast<long>(contents.subject_spki.size()));
  if (subject_key == nullptr) fail(ErrorCode::kInvalidArgument, "invalid subject public key");
  X509_set_pubkey(x, subject_key);
  EVP_PKEY_free(subject_key);

  add_nid_extension(x, NID_key_usage, "critical,digitalSignature");
  add_nid_extension(x, NID_ext_key_usage, "codeSigning");
  // Empty subject name, so the SAN is critical.
  add_raw_extension(x, "2.5.29.17",
                    encode_san(contents.fields.san_type, contents.fields.san_value), true);
  if (contents.signing_input) {
    add_raw_extension(x, contents.oids.signing_input, as_bytes(*contents.signing_input), false);
  }
  if (contents.proof) add_raw_extension(x, contents.oids.proof, *contents.proof, false);
  add_raw_extension(x, contents.oids.issuer, as_bytes(contents.fields.issuer), false);
  sign_or_throw(x, ca_key);
  return Certificate::from_der(i2d_cert(x));
}

Certificate attach_sct(const Certificate& precert, ByteView sct_wire, const std::string& sct_oid,
                       const SigningKey& ca_key) {
  X509* x = X509_dup(precert.get());
  Certificate cert(x);
  add_raw_extension(x, sct_oid, sct_wire, false);
  sign_or_throw(x, ca_key);
  return Certificate::from_der(i2d_cert(x));
}

Certificate make_root(const SigningKey& ca_key, int64_t not_before, int64_t lifetime_seconds,
                      const std::string& common_name) {
  Certificate cert(X509_new());
  X509* x = cert.get();
  X509_set_version(x, 2);
  const uint8_t serial[] = {0x01};
  set_serial(x, serial);
  X509_NAME* name = X509_get_subject_name(x);
  X509_NAME_add_entry_by_txt(name, "O", MBSTRING_ASC,
                             reinterpret_cast<const unsigned char*>("poa"), -1, -1, 0);
  X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC,
                             reinterpret_cast<const unsigned char*>(common_name.c_str()), -1, -1, 0);
  X509_set_issuer_name(x, name);
  ASN1_TIME_set(X509_getm_notBefore(x), static_cast<time_t>(not_before));
  ASN1_TIME_set(X509_getm_notAfter(x), static_cast<time_t>(not_before + lifetime_seconds));
  X509_set_pubkey(x, ca_key.get());
  add_nid_extension(x, NID_basic_constraints, "critical,CA:TRUE");
  add_nid_extension(x, NID_key_usage, "critical,keyCertSign");
  sign_or_throw(x, ca_key);
  return Certificate::from_der(i2d_cert(x));
}

}  // namespace poa::ca
