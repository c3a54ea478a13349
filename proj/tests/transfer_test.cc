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

#include "gtest/gtest.h"
#include "oracles.h"

namespace ticketdiff {
namespace {

WinningTicketSet Tickets(size_t vocab, std::vector<size_t> ids) {
  WinningTicketSet t;
  t.vocab_size = vocab;
  t.token_ids = std::move(ids);
  return t;
}

bool SameBytes(const Checkpoint& a, const Checkpoint& b) {
  return SerializeCheckpoint(a) == SerializeCheckpoint(b);
}

// Pair with an extra non-target tensor that differs between base and tuned.
oracles::MatrixPair WithBias(oracles::MatrixPair pair) {
  pair.base.tensors.push_back({"bias", {3}, {1.0f, 2.0f, 3.0f}});
  pair.tuned.tensors.push_back({"bias", {3}, {9.0f, 9.0f, 9.0f}});
  return pair;
}

TEST(Splice, AllRowsGivesTuned) {
  const auto pair = oracles::RandomDifferingPair(6, 5, 1);
  const auto out = SplicePartialTransfer(pair.base, pair.tuned, "embed",
                                         Tickets(6, {0, 1, 2, 3, 4, 5}));
  EXPECT_TRUE(SameBytes(out, pair.tuned));
}

TEST(Splice, NoRowsGivesBase) {
  const auto pair = WithBias(oracles::RandomDifferingPair(6, 5, 2));
  const auto out =
      SplicePartialTransfer(pair.base, pair.tuned, "embed", Tickets(6, {}));
  EXPECT_TRUE(SameBytes(out, pair.base));
}

TEST(Splice, SingleRowElementwise) {
  const auto pair = oracles::RandomDifferingPair(4, 3, 3);
  const auto out =
      SplicePartialTransfer(pair.base, pair.tuned, "embed", Tickets(4, {2}));
  const auto& b = pair.base.tensors[0].data;
  const auto& t = pair.tuned.tensors[0].data;
  const auto& o = out.tensors[0].data;
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      const float expected = i == 2 ? t[i * 3 + j] : b[i * 3 + j];
      EXPECT_EQ(std::memcmp(&o[i * 3 + j], &expected, sizeof(float)), 0);
    }
  }
}

TEST(Splice, IdempotentAndLeavesOtherTensors) {
  const auto pair = WithBias(oracles::RandomDifferingPair(20, 8, 4));
  const auto tickets = Tickets(20, {1, 5, 6, 19});
  const auto once = SplicePartialTransfer(pair.base, pair.tuned, "embed", tickets);
  const auto twice = SplicePartialTransfer(once, pair.tuned, "embed", tickets);
  EXPECT_TRUE(SameBytes(once, twice));
  ASSERT_NE(once.Find("bias"), nullptr);
  EXPECT_EQ(once.Find("bias")->data, pair.base.Find("bias")->data);
}

TEST(Splice, DiffRowsMatchesTickets) {
  const auto pair = oracles::RandomDifferingPair(30, 6, 5);
  const std::vector<size_t> ids = {0, 3, 4, 17, 29};
  const auto out =
      SplicePartialTransfer(pair.base, pair.tuned, "embed", Tickets(30, ids));
  EXPECT_EQ(DiffRows(out, pair.base, "embed"), ids);

  // Rows where base and tuned coincide never show up.
  auto same_row = pair;
  auto& tuned = same_row.tuned.tensors[0].data;
  const auto& base = same_row.base.tensors[0].data;
  std::copy(base.begin() + 3 * 6, base.begin() + 4 * 6, tuned.begin() + 3 * 6);
  const auto out2 = SplicePartialTransfer(same_row.base, same_row.tuned, "embed",
                                          Tickets(30, ids));
  EXPECT_EQ(DiffRows(out2, same_row.base, "embed"),
            (std::vector<size_t>{0, 4, 17, 29}));
}

TEST(Splice, Errors) {
  const auto pair = oracles::RandomDifferingPair(4, 3, 6);
  EXPECT_THROW(
      SplicePartialTransfer(pair.base, pair.tuned, "embed", Tickets(4, {4})),
      std::invalid_argument);
  EXPECT_THROW(
      SplicePartialTransfer(pair.base, pair.tuned, "embed", Tickets(5, {1})),
      std::invalid_argument);
  EXPECT_THROW(
      SplicePartialTransfer(pair.base, pair.tuned, "missing", Tickets(4, {1})),
      CheckpointError);
}

TEST(Mask, Examples) {
  const auto t = Tickets(4, {0, 2});
  EXPECT_EQ(EmitMask(t, false).trainable, (std::vector<uint8_t>{1, 0, 1, 0}));
  EXPECT_EQ(EmitMask(t, true).trainable, (std::vector<uint8_t>{0, 1, 0, 1}));
  const auto all = EmitMask(Tickets(3, {}), true);
  EXPECT_EQ(all.vocab_size, 3u);
  EXPECT_EQ(all.trainable, (std::vector<uint8_t>{1, 1, 1}));
  EXPECT_TRUE(all.IsTrainable(2));
}

TEST(DiffRows, IdenticalAndMismatch) {
  const auto pair = oracles::RandomDifferingPair(5, 3, 7);
  EXPECT_TRUE(DiffRows(pair.base, pair.base, "embed").empty());
  EXPECT_EQ(DiffRows(pair.base, pair.tuned, "embed").size(), 5u);
  const auto other = oracles::RandomDifferingPair(5, 4, 7);
  EXPECT_THROW(DiffRows(pair.base, other.base, "embed"), CheckpointError);
}

}  // namespace
}  // namespace ticketdiff
