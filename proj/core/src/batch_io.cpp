#include "superconc/batch_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "superconc/errors.hpp"
#include "superconc/json_io.hpp"

namespace superconc {

static_assert(std::endian::native == std::endian::little, "batch files are little-endian");

namespace {

constexpr std::size_t kHeaderBytes = 32;

template <class T>
void put(char*& p, T v) {
    std::memcpy(p, &v, sizeof v);
    p += sizeof v;
}

template <class T>
T get(const char*& p) {
    T v;
    std::memcpy(&v, p, sizeof v);
    p += sizeof v;
    return v;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
    auto s = path;
    s += ".json";
    return s;
}

}  // namespace

void write_batch(const SampleBatch& batch, const std::filesystem::path& path) {
    char header[kHeaderBytes];
    char* p = header;
    std::memcpy(p, kBatchMagic, 8);
    p += 8;
    put<std::uint32_t>(p, kBatchVersion);
    put<std::uint64_t>(p, batch.length());
    put<std::uint64_t>(p, batch.batch());
    put<std::uint32_t>(p, 1);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(header, kHeaderBytes);
    out.write(reinterpret_cast<const char*>(batch.paths.data()),
              static_cast<std::streamsize>(batch.paths.size() * sizeof(double)));
    if (!out) throw Error("write failed for " + path.string());

    json meta;
    meta["model"] = model_to_json(batch.model);
    meta["geometry"] = geometry_to_json(batch.geometry);
    meta["seed"] = batch.seed;
    meta["stream_base"] = batch.stream_base;
    meta["method"] = std::string(to_string(batch.method));
    meta["n"] = batch.length();
    meta["batch"] = batch.batch();
    std::ofstream side(sidecar(path), std::ios::trunc);
    if (!side) throw Error("cannot open " + sidecar(path).string() + " for writing");
    side << dump_json(meta) << '\n';
}

BatchHeader read_batch_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    char header[kHeaderBytes];
    in.read(header, kHeaderBytes);
    if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes)) throw Error(path.string() + ": truncated header");
    if (std::memcmp(header, kBatchMagic, 8) != 0) throw Error(path.string() + ": not a batch file");
    const char* p = header + 8;
    BatchHeader h;
    h.version = get<std::uint32_t>(p);
    h.n = get<std::uint64_t>(p);
    h.batch = get<std::uint64_t>(p);
    h.float64 = get<std::uint32_t>(p);
    if (h.version != kBatchVersion) throw Error(path.string() + ": unsupported version " + std::to_string(h.version));
    if (h.float64 != 1) throw Error(path.string() + ": only float64 payloads are supported");
    return h;
}

SampleBatch read_batch(const std::filesystem::path& path) {
    const BatchHeader h = read_batch_header(path);
    std::ifstream side(sidecar(path));
    if (!side) throw Error("missing sidecar " + sidecar(path).string());
    const json meta = json::parse(side);

    SampleBatch b;
    b.model = model_from_json(meta.at("model"));
    b.geometry = geometry_from_json(meta.at("geometry"));
    b.seed = meta.at("seed").get<std::uint64_t>();
    b.stream_base = meta.at("stream_base").get<std::uint64_t>();
    b.method = sample_method_from_string(meta.at("method").get<std::string>());
    if (b.geometry.size() != h.n) throw Error(path.string() + ": header n disagrees with the sidecar geometry");

    b.paths.resize(static_cast<Eigen::Index>(h.n), static_cast<Eigen::Index>(h.batch));
    std::ifstream in(path, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(kHeaderBytes));
    const auto bytes = static_cast<std::streamsize>(h.n * h.batch * sizeof(double));
    in.read(reinterpret_cast<char*>(b.paths.data()), bytes);
    if (in.gcount() != bytes) throw Error(path.string() + ": truncated payload");
    return b;
}

}  // namespace superconc
