#pragma once

// RFC 6962 / RFC 9162 Merkle tree: SHA-256, 0x00 leaf prefix, 0x01 node
// prefix. Shared by the JWK ledger and the CT log.

#include <cstdint>
#include <vector>

#include "poa/common/bytes.hpp"

namespace poa::merkle {

Digest32 leaf_hash(ByteView leaf_data);
Digest32 node_hash(const Digest32& left, const Digest32& right);
Digest32 empty_root();

struct InclusionProof {
  uint64_t index = 0;
  uint64_t tree_size = 0;
  std::vector<Digest32> path;

  bool operator==(const InclusionProof&) const = default;
};

struct ConsistencyProof {
  uint64_t old_size = 0;
  uint64_t new_size = 0;
  std::vector<Digest32> path;

  bool operator==(const ConsistencyProof&) const = default;
};

/// Append-only tree over leaf hashes. Complete subtrees are cached per
/// level, so roots and proofs for any prefix cost O(log n) node lookups.
class Tree {
 public:
  void append(const Digest32& leaf);
  uint64_t size() const { return levels_.empty() ? 0 : levels_[0].size(); }
  const Digest32& leaf(uint64_t index) const;

  Digest32 root() const { return root(size()); }
  // Root of the first `tree_size` leaves.
  Digest32 root(uint64_t tree_size) const;

  // Throws kNotFound when index >= tree_size or tree_size > size().
  InclusionProof prove_inclusion(uint64_t index, uint64_t tree_size) const;
  // Throws kNotFound unless 0 < old_size <= new_size <= size().
  ConsistencyProof prove_consistency(uint64_t old_size, uint64_t new_size) const;

 private:
  Digest32 subtree(uint64_t begin, uint64_t end) const;
  void path(uint64_t index, uint64_t begin, uint64_t end, std::vector<Digest32>& out) const;
  void subproof(uint64_t m, uint64_t begin, uint64_t end, bool complete,
                std::vector<Digest32>& out) const;

  // levels_[k][i] is the root of the complete subtree of 2^k leaves starting
  // at leaf i * 2^k.
  std::vector<std::vector<Digest32>> levels_;
};

bool verify_inclusion(const Digest32& leaf, const InclusionProof& proof, const Digest32& root);

bool verify_consistency(const ConsistencyProof& proof, const Digest32& old_root,
                        const Digest32& new_root);

}  // namespace poa::merkle
