// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint of named tensors. All integers and floats little-endian:
//
//   bytes 0..7   magic "DRECKPT1"
//   u32          tensor count
//   per tensor:
//     u32        name length in bytes, followed by the UTF-8 name
//     u32        rank, followed by rank x u64 dimensions
//     f64        product(dims) values, row-major
//
// Names are unique; order is preserved.
#pragma once

#include "dualre/ndgrad.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dualre {

using TensorList = std::vector<std::pair<std::string, Tensor>>;

void write_checkpoint(std::ostream& out, const TensorList& tensors);
void write_checkpoint(const std::string& path, const TensorList& tensors);

TensorList read_checkpoint(std::istream& in);
TensorList read_checkpoint(const std::string& path);

/// Looks up a tensor by name; throws IoError when missing.
const Tensor& find_tensor(const TensorList& tensors, const std::string& name);

}  // namespace dualre
