#include "poa/merkle/merkle.hpp"

#include <bit>

#include "poa/common/error.hpp"
#include "poa/common/sha256.hpp"

namespace poa::merkle {
namespace {

// Largest power of two strictly less than n (n >= 2).
uint64_t split_point(uint64_t n) {
  return std::bit_floor(n - 1);
}

}  // namespace

Digest32 leaf_hash(ByteView leaf_data) {
  const uint8_t prefix = 0x00;
  return sha256({ByteView(&prefix, 1), leaf_data});
}

Digest32 node_hash(const Digest32& left, const Digest32& right) {
  const uint8_t prefix = 0x01;
  return sha256({ByteView(&prefix, 1), left, right});
}

Digest32 empty_root() {
  return sha256(ByteView{});
}

void Tree::append(const Digest32& leaf) {
  if (levels_.empty()) levels_.emplace_back();
  levels_[0].push_back(leaf);
  for (size_t k = 0; levels_[k].size() % 2 == 0; ++k) {
    if (levels_.size() == k + 1) levels_.emplace_back();
    const auto& lower = levels_[k];
    levels_[k + 1].push_back(node_hash(lower[lower.size() - 2], lower.back()));
  }
}

const Digest32& Tree::leaf(uint64_t index) const {
  if (index >= size()) fail(ErrorCode::kNotFound, "leaf index out of range");
  return levels_[0][index];
}

Digest32 Tree::subtree(uint64_t begin, uint64_t end) const {
  const uint64_t n = end - begin;
  if (std::has_single_bit(n) && begin % n == 0) {
    const auto k = static_cast<size_t>(std::countr_zero(n));
    return levels_[k][begin >> k];
  }
  const uint64_t k = split_point(n);
  return node_hash(subtree(begin, begin + k), subtree(begin + k, end));
}

Digest32 Tree::root(uint64_t tree_size) const {
  if (tree_size > size()) fail(ErrorCode::kNotFound, "tree size beyond log size");
  if (tree_size == 0) return empty_root();
  return subtree(0, tree_size);
}

void Tree::path(uint64_t index, uint64_t begin, uint64_t end, std::vector<Digest32>& out) const {
  const uint64_t n = end - begin;
  if (n <= 1) return;
  const uint64_t k = split_point(n);
  if (index - begin < k) {
    path(index, begin, begin + k, out);
    out.push_back(subtree(begin + k, end));
  } else {
    path(index, begin + k, end, out);
    out.push_back(subtree(begin, begin + k));
  }
}

InclusionProof Tree::prove_inclusion(uint64_t index, uint64_t tree_size) const {
  if (tree_size > size() || index >= tree_size) {
    fail(ErrorCode::kNotFound, "inclusion proof out of range");
  }
  InclusionProof proof{index, tree_size, {}};
  path(index, 0, tree_size, proof.path);
  return proof;
}

// SUBPROOF(m, D[begin:end], complete) from RFC 6962 section 2.1.2.
void Tree::subproof(uint64_t m, uint64_t begin, uint64_t end, bool complete,
                    std::vector<Digest32>& out) const {
  const uint64_t n = end - begin;
  if (m == n) {
    if (!complete) out.push_back(subtree(begin, end));
    return;
  }
  const uint64_t k = split_point(n);
  if (m <= k) {
    subproof(m, begin, begin + k, complete, out);
    out.push_back(subtree(begin + k, end));
  } else {
    subproof(m - k, begin + k, end, false, out);
    out.push_back(subtree(begin, begin + k));
  }
}

ConsistencyProof Tree::prove_consistency(uint64_t old_size, uint64_t new_size) const {
  if (old_size == 0 || old_size > new_size || new_size > size()) {
    fail(ErrorCode::kNotFound, "consistency proof out of range");
  }
  ConsistencyProof proof{old_size, new_size, {}};
  if (old_size < new_size) subproof(old_size, 0, new_size, true, proof.path);
  return proof;
}

// RFC 9162 section 2.1.3.2.
bool verify_inclusion(const Digest32& leaf, const InclusionProof& proof, const Digest32& root) {
  if (proof.index >= proof.tree_size) return false;
  uint64_t fn = proof.index;
  uint64_t sn = proof.tree_size - 1;
  Digest32 r = leaf;
  for (const Digest32& p : proof.path) {
    if (sn == 0) return false;
    if ((fn & 1) == 1 || fn == sn) {
      r = node_hash(p, r);
      if ((fn & 1) == 0) {
        while ((fn & 1) == 0 && fn != 0) {
          fn >>= 1;
          sn >>= 1;
        }
      }
    } else {
      r = node_hash(r, p);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && r == root;
}

// RFC 9162 section 2.1.4.2.
bool verify_consistency(const ConsistencyProof& proof, const Digest32& old_root,
                        const Digest32& new_root) {
  const uint64_t first = proof.old_size;
  const uint64_t second = proof.new_size;
  if (first == 0 || first > second) return false;
  if (first == second) return proof.path.empty() && old_root == new_root;
  if (proof.path.empty()) return false;
  std::vector<Digest32> path = proof.path;
  if (std::has_single_bit(first)) path.insert(path.begin(), old_root);
  uint64_t fn = first - 1;
  uint64_t sn = second - 1;
  while ((fn & 1) == 1) {
    fn >>= 1;
    sn >>= 1;
  }
  Digest32 fr = path[0];
  Digest32 sr = path[0];
  for (size_t i = 1; i < path.size(); ++i) {
    const Digest32& c = path[i];
    if (sn == 0) return false;
    if ((fn & 1) == 1 || fn == sn) {
      fr = node_hash(c, fr);
      sr = node_hash(c, sr);
      if ((fn & 1) == 0) {
        while ((fn & 1) == 0 && fn != 0) {
          fn >>= 1;
          sn >>= 1;
        }
      }
    } else {
      sr = node_hash(sr, c);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && fr == old_root && sr == new_root;
}

}  // namespace poa::merkle
