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

#ifndef TICKETDIFF_CHECKPOINT_H_
#define TICKETDIFF_CHECKPOINT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ticketdiff {

// Raised for malformed or inconsistent checkpoint contents.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[4] = {'K', 'S', 'L', 'T'};
inline constexpr uint32_t kCheckpointFormatVersion = 1;

struct TensorRecord {
  std::string name;
  std::vector<size_t> shape;  // row-major
  std::vector<float> data;

  size_t ElementCount() const;
};

struct Checkpoint {
  uint32_t format_version = kCheckpointFormatVersion;
  std::vector<TensorRecord> tensors;

  // nullptr when absent.
  const TensorRecord* Find(const std::string& name) const;
  TensorRecord* Find(const std::string& name);
};

// Checks names (non-empty, unique, no tab/newline), shapes, payload lengths
// and finiteness. Throws CheckpointError naming the offending tensor.
void ValidateCheckpoint(const Checkpoint& ckpt);

// Container layout:
//   "KSLT" | u32 LE version | u32 LE header length H | H bytes of header text
//   | raw f32 LE payloads.
// Header: one line per tensor, "name\tdim0,dim1,...\toffset\tlength\n", with
// offsets relative to the end of the header.
std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint ParseCheckpoint(std::span<const uint8_t> bytes);

void WriteCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

// Non-owning [vocab_size, dim] row view of a rank-2 tensor.
class EmbeddingView {
 public:
  EmbeddingView(std::span<const float> data, size_t vocab_size, size_t dim);

  size_t vocab_size() const { return vocab_size_; }
  size_t dim() const { return dim_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> Row(size_t i) const {
    return data_.subspan(i * dim_, dim_);
  }

 private:
  std::span<const float> data_;
  size_t vocab_size_;
  size_t dim_;
};

// Throws CheckpointError "tensor not found: NAME" or "not a matrix: NAME".
EmbeddingView GetEmbedding(const Checkpoint& ckpt, const std::string& name);

// Both checkpoints must hold `name` with identical rank-2 shape. Returns
// {vocab_size, dim}.
std::pair<size_t, size_t> ValidatePair(const Checkpoint& base,
                                       const Checkpoint& tuned,
                                       const std::string& name);

// Single-tensor checkpoint of shape [rows, cols] from comma-separated floats.
Checkpoint ImportCsvMatrix(const std::filesystem::path& path,
                           const std::string& tensor_name);
Checkpoint ParseCsvMatrix(const std::string& text,
                          const std::string& tensor_name);

std::string ShapeToString(std::span<const size_t> shape);

}  // namespace ticketdiff

#endif  // TICKETDIFF_CHECKPOINT_H_
