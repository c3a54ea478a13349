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

#include "ticketdiff/checkpoint.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

namespace ticketdiff {
namespace {

constexpr size_t kPreambleBytes = 12;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<uint8_t>(v >> shift));
  }
}

uint32_t GetU32(std::span<const uint8_t> bytes, size_t at) {
  uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | bytes[at + k];
  return v;
}

[[noreturn]] void Corrupt(const std::string& why) {
  throw CheckpointError("corrupt checkpoint: " + why);
}

template <typename Int>
bool ParseUnsigned(std::string_view text, Int& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// False on overflow.
bool CheckedProduct(std::span<const size_t> dims, size_t& out) {
  size_t product = 1;
  for (size_t d : dims) {
    if (d != 0 && product > std::numeric_limits<size_t>::max() / d) return false;
    product *= d;
  }
  out = product;
  return true;
}

}  // namespace

size_t TensorRecord::ElementCount() const {
  size_t count = 0;
  if (!CheckedProduct(shape, count)) {
    throw CheckpointError("shape overflows: " + name);
  }
  return count;
}

const TensorRecord* Checkpoint::Find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

TensorRecord* Checkpoint::Find(const std::string& name) {
  for (auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string ShapeToString(std::span<const size_t> shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void ValidateCheckpoint(const Checkpoint& ckpt) {
  std::set<std::string> seen;
  for (const auto& t : ckpt.tensors) {
    if (t.name.empty()) throw CheckpointError("empty tensor name");
    if (t.name.find_first_of("\t\n") != std::string::npos) {
      throw CheckpointError("tensor name contains tab or newline: " + t.name);
    }
    if (!seen.insert(t.name).second) {
      throw CheckpointError("duplicate tensor: " + t.name);
    }
    if (t.shape.empty()) throw CheckpointError("tensor has no shape: " + t.name);
    if (std::find(t.shape.begin(), t.shape.end(), size_t{0}) != t.shape.end()) {
      throw CheckpointError("tensor has a zero dimension: " + t.name);
    }
    if (t.data.size() != t.ElementCount()) {
      throw CheckpointError("data length does not match shape " +
                            ShapeToString(t.shape) + ": " + t.name);
    }
    for (float v : t.data) {
      if (!std::isfinite(v)) {
        throw CheckpointError("non-finite value in tensor: " + t.name);
      }
    }
  }
}

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& ckpt) {
  ValidateCheckpoint(ckpt);
  if (ckpt.format_version != kCheckpointFormatVersion) {
    throw CheckpointError("unsupported version " +
                          std::to_string(ckpt.format_version));
  }
  std::string header;
  size_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    std::string dims;
    for (size_t i = 0; i < t.shape.size(); ++i) {
      if (i) dims += ",";
      dims += std::to_string(t.shape[i]);
    }
    const size_t length = t.data.size() * sizeof(float);
    header += t.name + "\t" + dims + "\t" + std::to_string(offset) + "\t" +
              std::to_string(length) + "\n";
    offset += length;
  }
  if (header.size() > std::numeric_limits<uint32_t>::max()) {
    throw CheckpointError("header too large");
  }

  std::vector<uint8_t> out;
  out.reserve(kPreambleBytes + header.size() + offset);
  out.insert(out.end(), std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  PutU32(out, ckpt.format_version);
  PutU32(out, static_cast<uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& t : ckpt.tensors) {
    for (float v : t.data) PutU32(out, std::bit_cast<uint32_t>(v));
  }
  return out;
}

Checkpoint ParseCheckpoint(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 ||
      !std::equal(std::begin(kCheckpointMagic), std::end(kCheckpointMagic),
                  bytes.begin())) {
    throw CheckpointError("not a checkpoint");
  }
  if (bytes.size() < kPreambleBytes) Corrupt("truncated preamble");
  Checkpoint ckpt;
  ckpt.format_version = GetU32(bytes, 4);
  if (ckpt.format_version != kCheckpointFormatVersion) {
    throw CheckpointError("unsupported version " +
                          std::to_string(ckpt.format_version));
  }
  const size_t header_length = GetU32(bytes, 8);
  if (header_length > bytes.size() - kPreambleBytes) {
    Corrupt("header extends past end of file");
  }
  const std::string_view header(
      reinterpret_cast<const char*>(bytes.data() + kPreambleBytes),
      header_length);
  const auto payload = bytes.subspan(kPreambleBytes + header_length);

  if (!header.empty() && header.back() != '\n') Corrupt("unterminated header");
  auto lines = Split(header, '\n');
  lines.pop_back();  // text after the final newline is empty

  std::set<std::string> seen;
  for (size_t li = 0; li < lines.size(); ++li) {
    const auto fields = Split(lines[li], '\t');
    const std::string where = "header line " + std::to_string(li + 1);
    if (fields.size() != 4) Corrupt(where + " does not have 4 fields");
    TensorRecord t;
    t.name = std::string(fields[0]);
    if (t.name.empty()) Corrupt(where + " has an empty name");
    if (!seen.insert(t.name).second) Corrupt("duplicate tensor: " + t.name);
    for (auto dim_text : Split(fields[1], ',')) {
      size_t dim = 0;
      if (!ParseUnsigned(dim_text, dim) || dim == 0) {
        Corrupt(where + " has a bad dimension");
      }
      t.shape.push_back(dim);
    }
    size_t offset = 0;
    size_t length = 0;
    if (!ParseUnsigned(fields[2], offset) || !ParseUnsigned(fields[3], length)) {
      Corrupt(where + " has a bad offset or length");
    }
    size_t elements = 0;
    if (!CheckedProduct(t.shape, elements) ||
        elements > std::numeric_limits<size_t>::max() / sizeof(float) ||
        elements * sizeof(float) != length) {
      Corrupt(where + " length does not match shape");
    }
    if (offset > payload.size() || length > payload.size() - offset) {
      Corrupt("payload of " + t.name + " extends past end of file");
    }
    t.data.resize(elements);
    for (size_t k = 0; k < elements; ++k) {
      const float v =
          std::bit_cast<float>(GetU32(payload, offset + k * sizeof(float)));
      if (!std::isfinite(v)) Corrupt("non-finite value in tensor: " + t.name);
      t.data[k] = v;
    }
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void WriteCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = SerializeCheckpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return ParseCheckpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(std::string(e.what()) + " (" + path.string() + ")");
  }
}

EmbeddingView::EmbeddingView(std::span<const float> data, size_t vocab_size,
                             size_t dim)
    : data_(data), vocab_size_(vocab_size), dim_(dim) {
  if (vocab_size == 0 || dim == 0) {
    throw std::invalid_argument("embedding view needs positive dimensions");
  }
  if (data.size() != vocab_size * dim) {
    throw std::invalid_argument("embedding view size mismatch");
  }
}

EmbeddingView GetEmbedding(const Checkpoint& ckpt, const std::string& name) {
  const TensorRecord* t = ckpt.Find(name);
  if (t == nullptr) throw CheckpointError("tensor not found: " + name);
  if (t->shape.size() != 2) throw CheckpointError("not a matrix: " + name);
  return EmbeddingView(t->data, t->shape[0], t->shape[1]);
}

std::pair<size_t, size_t> ValidatePair(const Checkpoint& base,
                                       const Checkpoint& tuned,
                                       const std::string& name) {
  const TensorRecord* b = base.Find(name);
  if (b == nullptr) throw CheckpointError("tensor not found in base: " + name);
  const TensorRecord* t = tuned.Find(name);
  if (t == nullptr) throw CheckpointError("tensor not found in tuned: " + name);
  if (b->shape != t->shape) {
    throw CheckpointError("shape mismatch for " + name + ": base " +
                          ShapeToString(b->shape) + " vs tuned " +
                          ShapeToString(t->shape));
  }
  if (b->shape.size() != 2) throw CheckpointError("not a matrix: " + name);
  return {b->shape[0], b->shape[1]};
}

Checkpoint ParseCsvMatrix(const std::string& text,
                          const std::string& tensor_name) {
  TensorRecord t;
  t.name = tensor_name;
  size_t cols = 0;
  size_t rows = 0;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = Split(line, ',');
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw CheckpointError("ragged row at line " + std::to_string(line_no) +
                            ": expected " + std::to_string(cols) +
                            " columns, got " + std::to_string(cells.size()));
    }
    for (size_t c = 0; c < cells.size(); ++c) {
      std::string_view cell = cells[c];
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      float v = 0.0f;
      const auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        throw CheckpointError("non-numeric cell at line " +
                              std::to_string(line_no) + ", column " +
                              std::to_string(c + 1));
      }
      t.data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw CheckpointError("no rows");
  t.shape = {rows, cols};
  Checkpoint ckpt;
  ckpt.tensors.push_back(std::move(t));
  return ckpt;
}

Checkpoint ImportCsvMatrix(const std::filesystem::path& path,
                           const std::string& tensor_name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCsvMatrix(buffer.str(), tensor_name);
}

}  // namespace ticketdiff
