#include "tnce/synthdata/io.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tnce/error.h"
#include "tnce/util/binio.h"
#include "tnce/util/kv.h"

namespace tnce {

namespace {
constexpr char kMagic[8] = {'T', 'N', 'C', 'E', 'D', 'S', '0', '0'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_dataset(const MultiModalDataset& ds, const std::string& path) {
  ds.validate();
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(ds.num_modalities()));
  write_u64(out, ds.size());
  write_u8(out, ds.has_labels() ? 1 : 0);
  for (const auto& s : ds.specs) {
    write_str(out, s.name);
    write_u8(out, static_cast<std::uint8_t>(s.kind));
    write_u32(out, static_cast<std::uint32_t>(s.dim));
    write_f64(out, s.snr);
    write_u32(out, static_cast<std::uint32_t>(s.alphabet_size));
  }
  write_str(out, ds.provenance);
  if (ds.has_labels())
    for (std::size_t label : ds.labels)
      write_u32(out, static_cast<std::uint32_t>(label));
  for (const auto& t : ds.samples)
    for (const auto& view : t)
      for (double v : view) write_f64(out, v);

  write_file_atomic(path, out.str());
  write_file_atomic(path + ".meta", ds.provenance);
}

MultiModalDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a dataset file (bad magic): " + path);
  std::uint32_t version = read_u32(in, "version");
  if (version != kVersion)
    throw FormatError("unsupported dataset version " + std::to_string(version));

  std::uint32_t k = read_u32(in, "modality count");
  std::uint64_t n = read_u64(in, "sample count");
  std::uint8_t has_labels = read_u8(in, "label flag");
  if (k == 0) throw CorruptionError("dataset header: zero modalities");

  MultiModalDataset ds;
  for (std::uint32_t i = 0; i < k; ++i) {
    ModalitySpec s;
    s.name = read_str(in, "modality name");
    std::uint8_t kind = read_u8(in, "modality kind");
    if (kind > 2) throw CorruptionError("dataset header: bad modality kind");
    s.kind = static_cast<ViewKind>(kind);
    s.dim = read_u32(in, "modality dim");
    s.snr = read_f64(in, "modality snr");
    s.alphabet_size = read_u32(in, "alphabet size");
    ds.specs.push_back(std::move(s));
  }
  ds.provenance = read_str(in, "provenance");
  if (has_labels) {
    ds.labels.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
      ds.labels.push_back(read_u32(in, "label"));
  }
  ds.samples.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Tuple t;
    t.reserve(k);
    for (std::uint32_t m = 0; m < k; ++m) {
      std::vector<double> view(ds.specs[m].dim);
      for (double& v : view) v = read_f64(in, "sample record");
      t.push_back(std::move(view));
    }
    ds.samples.push_back(std::move(t));
  }
  // Trailing bytes mean the header undercounts the records.
  if (in.peek() != EOF)
    throw CorruptionError("dataset file has trailing bytes beyond declared records");
  try {
    ds.validate();
  } catch (const Error& e) {
    throw CorruptionError(std::string("dataset file inconsistent: ") + e.what());
  }
  return ds;
}

}  // namespace tnce
