#include "bhs/serialize.hpp"

#include <bit>
#include <cstring>

#include "bhs/hash.hpp"

namespace bhs {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host byte order");

namespace {

constexpr std::string_view kMagic = "BHSMODEL";
constexpr std::size_t kDigestSize = 32;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_str(std::string& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  void get_doubles(double* dst, std::size_t count) {
    if (count > (bytes_.size() - pos_) / sizeof(double)) {
      fail();
    }
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) {
      fail();
    }
  }
  [[noreturn]] static void fail() {
    throw Error(Errc::kFormatVersionMismatch, "model file structure is inconsistent");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_model(const Model& model, std::string_view vocab_hash,
                         std::string_view pipeline_hash) {
  std::string out(kMagic);
  put<std::uint32_t>(out, kModelFormatVersion);
  put_str(out, model.spec().to_json().dump());
  put_str(out, vocab_hash);
  put_str(out, pipeline_hash);
  const ad::ParameterStore& params = model.parameters();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ad::Parameter& p = params[i];
    put_str(out, p.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) {
      put<std::uint64_t>(out, d);
    }
    out.append(reinterpret_cast<const char*>(p.value.data()), p.value.size() * sizeof(double));
  }
  const Digest digest = sha256(out);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

DecodedModel decode_model(std::string_view bytes) {
  const std::size_t header = kMagic.size() + sizeof(std::uint32_t);
  if (bytes.size() < header + kDigestSize) {
    throw Error(Errc::kChecksumMismatch, "model file is truncated");
  }
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    throw Error(Errc::kFormatVersionMismatch, "not a model file (bad magic bytes)");
  }
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + kMagic.size(), sizeof version);
  if (version != kModelFormatVersion) {
    throw Error(Errc::kFormatVersionMismatch, "model format version " + std::to_string(version) +
                                                  ", expected " +
                                                  std::to_string(kModelFormatVersion));
  }
  const std::string_view body = bytes.substr(0, bytes.size() - kDigestSize);
  const Digest digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), kDigestSize) != 0) {
    throw Error(Errc::kChecksumMismatch, "model file checksum does not match its contents");
  }

  Reader r(body.substr(header));
  nlohmann::json spec_json;
  try {
    spec_json = nlohmann::json::parse(r.get_str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kFormatVersionMismatch, std::string("model spec block: ") + e.what());
  }
  DecodedModel out{Model(ModelSpec::from_json(spec_json), 0), r.get_str(), r.get_str()};
  ad::ParameterStore& params = out.model.parameters();
  const auto count = r.get<std::uint32_t>();
  if (count != params.size()) {
    throw Error(Errc::kFormatVersionMismatch,
                "model file holds " + std::to_string(count) + " tensors, spec needs " +
                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = r.get_str();
    ad::Parameter* p = params.find(name);
    if (p == nullptr) {
      throw Error(Errc::kFormatVersionMismatch, "unexpected tensor \"" + name + "\"");
    }
    ad::Shape shape(r.get<std::uint32_t>());
    for (std::size_t& d : shape) {
      d = r.get<std::uint64_t>();
    }
    if (shape != p->value.shape()) {
      throw Error(Errc::kFormatVersionMismatch, "tensor \"" + name + "\" has shape " +
                                                    ad::shape_string(shape) + ", expected " +
                                                    ad::shape_string(p->value.shape()));
    }
    r.get_doubles(p->value.data(), p->value.size());
  }
  if (!r.done()) {
    throw Error(Errc::kFormatVersionMismatch, "trailing bytes after the last tensor");
  }
  return out;
}

void save_model(const TrainedModel& trained, const std::filesystem::path& path) {
  write_file(path, encode_model(trained.model, trained.vocab.fingerprint(), trained.pipeline_hash));
}

LoadedModel load_model(const std::filesystem::path& model_path,
                       const std::filesystem::path& vocab_path) {
  DecodedModel decoded = decode_model(read_file(model_path));
  Vocabulary vocab = Vocabulary::from_tsv(read_file(vocab_path));
  std::vector<LoadWarning> warnings;
  if (vocab.fingerprint() != decoded.vocab_hash) {
    warnings.push_back({Errc::kVocabHashMismatch,
                        vocab_path.string() + " is not the vocabulary this model was trained with"});
  }
  return {TrainedModel{std::move(decoded.model), std::move(vocab), std::move(decoded.pipeline_hash)},
          std::move(warnings)};
}

}  // namespace bhs
