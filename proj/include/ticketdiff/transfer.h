//
// Copyright 2026 The ticketdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef TICKETDIFF_TRANSFER_H_
#define TICKETDIFF_TRANSFER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ticketdiff/checkpoint.h"
#include "ticketdiff/selection.h"

namespace ticketdiff {

struct RowMask {
  size_t vocab_size = 0;
  std::vector<uint8_t> trainable;  // one flag per row

  bool IsTrainable(size_t row) const { return trainable.at(row) != 0; }
};

// Copy of `base` in which the ticket rows of `tensor_name` are replaced, byte
// for byte, by the corresponding rows of `tuned`.
Checkpoint SplicePartialTransfer(const Checkpoint& base, const Checkpoint& tuned,
                                 const std::string& tensor_name,
                                 const WinningTicketSet& tickets);

// trainable[i] = (i in tickets) XOR complement.
RowMask EmitMask(const WinningTicketSet& tickets, bool complement);

// Rows of `tensor_name` whose payload bytes differ between a and b.
std::vector<size_t> DiffRows(const Checkpoint& a, const Checkpoint& b,
                             const std::string& tensor_name);

}  // namespace ticketdiff

#endif  // TICKETDIFF_TRANSFER_H_
