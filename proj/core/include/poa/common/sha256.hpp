#pragma once

#include <initializer_list>

#include "poa/common/bytes.hpp"

namespace poa {

Digest32 sha256(ByteView data);
Digest32 sha256(std::initializer_list<ByteView> parts);

}  // namespace poa
