#include "explore/dataset_store.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <array>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "explore/json_codec.hpp"

namespace explore {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::internal_error, "hashing failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

/// 16 random bytes as unpadded base64url (22 characters).
std::string random_id() {
    std::array<unsigned char, 16> raw{};
    if (RAND_bytes(raw.data(), static_cast<int>(raw.size())) != 1) {
        throw Error(ErrorCode::internal_error, "random source unavailable");
    }
    std::array<unsigned char, 32> encoded{};
    const int n = EVP_EncodeBlock(encoded.data(), raw.data(), static_cast<int>(raw.size()));
    std::string id(reinterpret_cast<const char*>(encoded.data()), static_cast<std::size_t>(n));
    while (!id.empty() && id.back() == '=') {
        id.pop_back();
    }
    for (auto& c : id) {
        if (c == '+') {
            c = '-';
        } else if (c == '/') {
            c = '_';
        }
    }
    return id;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::internal_error, "cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Write to a sibling temporary file, then rename over the target.
void write_atomically(const fs::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp-" + random_id();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorCode::internal_error, "cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

}  // namespace

Json to_json(const DatasetRecord& r) {
    return {{"id", r.id},
            {"name", r.name},
            {"created_at", r.created_at},
            {"byte_size", r.byte_size},
            {"sha256", r.sha256},
            {"parse_options", codec::encode(r.options)},
            {"schema", codec::encode(r.schema)}};
}

DatasetRecord record_from_json(const Json& j) {
    DatasetRecord r;
    r.id = j.at("id").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    r.byte_size = j.at("byte_size").get<std::size_t>();
    r.sha256 = j.at("sha256").get<std::string>();
    r.options = codec::decode_parse_options(j.at("parse_options"));
    r.schema = codec::decode_schema(j.at("schema"));
    return r;
}

DatasetStore::DatasetStore(fs::path directory, std::size_t max_bytes)
    : directory_(std::move(directory)), max_bytes_(max_bytes) {
    fs::create_directories(directory_ / "blobs");
    const auto manifest = directory_ / "manifest.json";
    if (fs::exists(manifest)) {
        const auto doc = Json::parse(read_file(manifest));
        for (const auto& entry : doc.at("datasets")) {
            by_id_[entry.at("id").get<std::string>()] = records_.size();
            records_.push_back(record_from_json(entry));
        }
    }
}

fs::path DatasetStore::blob_path(const std::string& sha256) const {
    return directory_ / "blobs" / (sha256 + ".csv");
}

void DatasetStore::write_manifest() const {
    Json datasets = Json::array();
    for (const auto& r : records_) {
        datasets.push_back(to_json(r));
    }
    write_atomically(directory_ / "manifest.json", Json{{"version", 1}, {"datasets", datasets}}.dump(2));
}

DatasetRecord DatasetStore::store(std::string_view bytes, std::string name, const ParseOptions& options) {
    if (bytes.size() > max_bytes_) {
        throw Error(ErrorCode::payload_too_large, "upload exceeds the size limit",
                    {{"byte_size", bytes.size()}, {"max_bytes", max_bytes_}});
    }
    auto table = std::make_shared<const Table>(parse_csv(bytes, options, name));

    DatasetRecord record;
    record.name = std::move(name);
    record.created_at = utc_now();
    record.byte_size = bytes.size();
    record.sha256 = sha256_hex(bytes);
    record.options = options;
    record.schema = schema(*table);

    const auto blob = blob_path(record.sha256);
    {
        std::unique_lock lock(mutex_);
        if (!fs::exists(blob)) {
            write_atomically(blob, bytes);
        }
        do {
            record.id = random_id();
        } while (by_id_.count(record.id) != 0);
        by_id_[record.id] = records_.size();
        records_.push_back(record);
        try {
            write_manifest();
        } catch (...) {
            records_.pop_back();
            by_id_.erase(record.id);
            throw;
        }
    }
    std::lock_guard cache_lock(cache_mutex_);
    cache_[record.id] = std::move(table);
    return record;
}

DatasetRecord DatasetStore::store_table(const Table& table, std::string name) {
    return store(to_csv(table), std::move(name));
}

std::vector<DatasetRecord> DatasetStore::list() const {
    std::shared_lock lock(mutex_);
    return records_;
}

DatasetRecord DatasetStore::record(const std::string& id) const {
    std::shared_lock lock(mutex_);
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw Error(ErrorCode::unknown_dataset, "no dataset with id '" + id + "'", {{"id", id}});
    }
    return records_[it->second];
}

std::string DatasetStore::raw_bytes(const std::string& id) const {
    return read_file(blob_path(record(id).sha256));
}

std::shared_ptr<const Table> DatasetStore::load(const std::string& id) const {
    {
        std::lock_guard lock(cache_mutex_);
        if (const auto it = cache_.find(id); it != cache_.end()) {
            return it->second;
        }
    }
    const auto r = record(id);
    auto table = std::make_shared<const Table>(parse_csv(read_file(blob_path(r.sha256)), r.options, r.name));
    std::lock_guard lock(cache_mutex_);
    return cache_.emplace(id, std::move(table)).first->second;
}

}  // namespace explore
