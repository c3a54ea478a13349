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

#include "ticketdiff/transfer.h"

#include <cstring>
#include <stdexcept>

namespace ticketdiff {

Checkpoint SplicePartialTransfer(const Checkpoint& base, const Checkpoint& tuned,
                                 const std::string& tensor_name,
                                 const WinningTicketSet& tickets) {
  const auto [vocab, dim] = ValidatePair(base, tuned, tensor_name);
  if (tickets.vocab_size != vocab) {
    throw std::invalid_argument("ticket vocab size " +
                                std::to_string(tickets.vocab_size) +
                                " does not match tensor rows " +
                                std::to_string(vocab));
  }
  ValidateTickets(tickets);

  Checkpoint out = base;
  const float* src = tuned.Find(tensor_name)->data.data();
  float* dst = out.Find(tensor_name)->data.data();
  for (size_t row : tickets.token_ids) {
    std::memcpy(dst + row * dim, src + row * dim, dim * sizeof(float));
  }
  return out;
}

RowMask EmitMask(const WinningTicketSet& tickets, bool complement) {
  ValidateTickets(tickets);
  RowMask mask;
  mask.vocab_size = tickets.vocab_size;
  mask.trainable.assign(tickets.vocab_size, complement ? 1 : 0);
  for (size_t row : tickets.token_ids) mask.trainable[row] = complement ? 0 : 1;
  return mask;
}

std::vector<size_t> DiffRows(const Checkpoint& a, const Checkpoint& b,
                             const std::string& tensor_name) {
  const auto [vocab, dim] = ValidatePair(a, b, tensor_name);
  const float* pa = a.Find(tensor_name)->data.data();
  const float* pb = b.Find(tensor_name)->data.data();
  std::vector<size_t> rows;
  for (size_t r = 0; r < vocab; ++r) {
    if (std::memcmp(pa + r * dim, pb + r * dim, dim * sizeof(float)) != 0) {
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace ticketdiff
