/*
 * Copyright 2026 The enzkg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "enzkg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <type_traits>

#include "enzkg/config.hpp"

namespace enzkg {
namespace {

constexpr char kMagic[8] = {'E', 'N', 'Z', 'K', 'G', 'C', 'K', 'P'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void u64(std::uint64_t v) { pod(v); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
  }
  void ids(const std::vector<CompoundId>& v) {
    u64(v.size());
    for (CompoundId c : v) pod(c.value);
  }
  void indices(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (std::size_t i : v) u64(i);
  }
  void tensor(const diff::Tensor& t) {
    const auto& s = t.shape();
    u64(s.rank());
    for (std::size_t d = 0; d < s.rank(); ++d) u64(s[d]);
    buf_.append(reinterpret_cast<const char*>(t.ptr()), t.size() * sizeof(double));
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : buf_(bytes) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::uint64_t count(std::size_t unit) {
    const std::uint64_t n = u64();
    if (unit && n > (buf_.size() - pos_) / unit) corrupt("length field exceeds payload");
    return n;
  }
  std::string str() {
    const std::uint64_t n = count(1);
    std::string s(buf_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<CompoundId> ids() {
    std::vector<CompoundId> v(count(4));
    for (auto& c : v) c = CompoundId(pod<std::uint32_t>());
    return v;
  }
  std::vector<std::size_t> indices() {
    std::vector<std::size_t> v(count(8));
    for (auto& i : v) i = u64();
    return v;
  }
  diff::Tensor tensor() {
    const std::uint64_t rank = u64();
    if (rank > diff::Shape::kMaxRank) corrupt("tensor rank " + std::to_string(rank));
    std::size_t d[3] = {0, 0, 0};
    std::uint64_t numel = 1;
    for (std::uint64_t k = 0; k < rank; ++k) {
      d[k] = u64();
      if (d[k] > (1ULL << 32)) corrupt("tensor dimension too large");
      numel *= d[k];
    }
    if (numel > (buf_.size() - pos_) / sizeof(double)) corrupt("tensor data exceeds payload");
    diff::Shape shape = rank == 0   ? diff::Shape{}
                        : rank == 1 ? diff::Shape{d[0]}
                        : rank == 2 ? diff::Shape{d[0], d[1]}
                                    : diff::Shape{d[0], d[1], d[2]};
    std::vector<double> data(numel);
    std::memcpy(data.data(), buf_.data() + pos_, numel * sizeof(double));
    pos_ += numel * sizeof(double);
    return diff::Tensor(shape, std::move(data));
  }
  bool done() const { return pos_ == buf_.size(); }
  [[noreturn]] static void corrupt(const std::string& what) {
    throw CheckpointCorruptError("corrupt checkpoint: " + what);
  }

 private:
  void need(std::size_t n) {
    if (buf_.size() - pos_ < n) corrupt("unexpected end of payload");
  }
  std::string_view buf_;
  std::size_t pos_ = 0;
};

void write_equations(Writer& w, const std::vector<EquationTriple>& triples) {
  w.u64(triples.size());
  for (const auto& t : triples) {
    w.ids(t.educts);
    w.pod<std::uint8_t>(t.enzyme.has_value());
    w.pod<std::uint32_t>(t.enzyme ? t.enzyme->value : 0);
    w.ids(t.products);
  }
}

void read_equations(Reader& r, EquationKG& kg) {
  const std::uint64_t n = r.count(8);
  for (std::uint64_t i = 0; i < n; ++i) {
    auto educts = r.ids();
    const bool has = r.pod<std::uint8_t>() != 0;
    const auto enzyme = r.pod<std::uint32_t>();
    auto products = r.ids();
    for (const auto* side : {&educts, &products}) {
      for (CompoundId c : *side) {
        if (c.index() >= kg.compounds().size()) Reader::corrupt("compound id out of range");
      }
    }
    if (has && enzyme >= kg.enzymes().size()) Reader::corrupt("enzyme id out of range");
    std::optional<EnzymeId> m;
    if (has) m = EnzymeId(enzyme);
    try {
      kg.add(std::move(educts), m, std::move(products));
    } catch (const Error& e) {
      Reader::corrupt(e.what());
    }
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model, const TrainState& state,
                      std::uint32_t version) {
  Writer w;
  w.str(format_config(model.config));
  for (const auto* names : {&model.kg.compounds().names(), &model.kg.enzymes().names()}) {
    w.u64(names->size());
    for (const auto& n : *names) w.str(n);
  }
  write_equations(w, model.kg.complete());
  write_equations(w, model.kg.incomplete());
  w.indices(model.split.train);
  w.indices(model.split.valid);
  w.indices(model.split.test);
  const auto params = model.parameters();
  w.u64(params.size());
  for (const diff::Parameter* p : params) {
    w.str(p->name());
    w.tensor(p->value());
  }
  w.u64(state.adam.step);
  w.u64(state.adam.m.size());
  for (std::size_t k = 0; k < state.adam.m.size(); ++k) {
    w.tensor(state.adam.m[k]);
    w.tensor(state.adam.v[k]);
  }
  w.u64(state.epoch);
  w.pod(state.best_valid_mrr);

  const std::string& payload = w.bytes();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t size = payload.size();
  out.write(reinterpret_cast<const char*>(&size), sizeof(size));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  const std::uint64_t sum = fnv1a(payload);
  out.write(reinterpret_cast<const char*>(&sum), sizeof(sum));
  if (!out) throw Error("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t kHeader = sizeof(kMagic) + 4 + 8;
  if (file.size() < kHeader + 8) Reader::corrupt("file too short");
  if (std::memcmp(file.data(), kMagic, sizeof(kMagic)) != 0) Reader::corrupt("bad magic");
  std::uint32_t version = 0;
  std::memcpy(&version, file.data() + sizeof(kMagic), 4);
  if (version != kCheckpointVersion) throw CheckpointVersionError(version, kCheckpointVersion);
  std::uint64_t size = 0;
  std::memcpy(&size, file.data() + sizeof(kMagic) + 4, 8);
  if (size != file.size() - kHeader - 8) Reader::corrupt("payload size mismatch");
  const std::string_view payload(file.data() + kHeader, size);
  std::uint64_t sum = 0;
  std::memcpy(&sum, file.data() + kHeader + size, 8);
  if (sum != fnv1a(payload)) Reader::corrupt("checksum mismatch");

  Reader r(payload);
  TrainConfig config;
  {
    std::istringstream text(r.str());
    try {
      apply_config(parse_config(text), config);
    } catch (const ConfigError& e) {
      Reader::corrupt(std::string("config: ") + e.what());
    }
  }
  EquationKG kg;
  for (std::uint64_t n = r.count(8), i = 0; i < n; ++i) kg.compounds().intern(r.str());
  for (std::uint64_t n = r.count(8), i = 0; i < n; ++i) kg.enzymes().intern(r.str());
  read_equations(r, kg);
  read_equations(r, kg);
  kg.finalize();
  Split split;
  split.train = r.indices();
  split.valid = r.indices();
  split.test = r.indices();
  for (const auto* part : {&split.train, &split.valid, &split.test}) {
    for (std::size_t i : *part) {
      if (i >= kg.complete().size()) Reader::corrupt("split index out of range");
    }
  }

  Checkpoint ck{make_model(std::move(kg), std::move(split), config), {}};
  auto params = ck.model.parameters();
  if (r.u64() != params.size()) Reader::corrupt("parameter count mismatch");
  for (diff::Parameter* p : params) {
    if (r.str() != p->name()) Reader::corrupt("unexpected parameter, wanted " + p->name());
    diff::Tensor t = r.tensor();
    if (!(t.shape() == p->value().shape())) {
      Reader::corrupt("shape mismatch for " + p->name());
    }
    p->value() = std::move(t);
  }
  ck.state.adam.step = r.u64();
  const std::uint64_t moments = r.u64();
  if (moments != 0 && moments != params.size()) Reader::corrupt("optimizer state size mismatch");
  for (std::uint64_t k = 0; k < moments; ++k) {
    ck.state.adam.m.push_back(r.tensor());
    ck.state.adam.v.push_back(r.tensor());
  }
  ck.state.epoch = r.u64();
  ck.state.best_valid_mrr = r.pod<double>();
  if (!r.done()) Reader::corrupt("trailing bytes in payload");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  write_checkpoint(out, model, state);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace enzkg
