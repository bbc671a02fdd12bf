#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "explore/table.hpp"

namespace explore {

inline constexpr std::size_t kDefaultMaxUploadBytes = 64u * 1024u * 1024u;

struct DatasetRecord {
    std::string id;
    std::string name;
    /// UTC, "YYYY-MM-DDTHH:MM:SSZ".
    std::string created_at;
    std::size_t byte_size = 0;
    /// Hex SHA-256 of the stored bytes; also the blob file name.
    std::string sha256;
    ParseOptions options;
    Schema schema;
};

nlohmann::json to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const nlohmann::json& json);

/// Uploaded CSV files kept as content-addressed blobs plus a JSON manifest under one directory.
/// Safe for concurrent use within one process; manifest writes are serialized and atomic.
class DatasetStore {
public:
    explicit DatasetStore(std::filesystem::path directory, std::size_t max_bytes = kDefaultMaxUploadBytes);

    /// Parses eagerly; nothing is written when parsing fails.
    DatasetRecord store(std::string_view bytes, std::string name, const ParseOptions& options = {});
    /// Stores the CSV serialization of a derived table.
    DatasetRecord store_table(const Table& table, std::string name);

    std::vector<DatasetRecord> list() const;
    /// Throws Error(unknown_dataset).
    DatasetRecord record(const std::string& id) const;
    std::shared_ptr<const Table> load(const std::string& id) const;
    std::string raw_bytes(const std::string& id) const;

    const std::filesystem::path& directory() const noexcept { return directory_; }
    std::size_t max_bytes() const noexcept { return max_bytes_; }

private:
    std::filesystem::path blob_path(const std::string& sha256) const;
    void write_manifest() const;

    std::filesystem::path directory_;
    std::size_t max_bytes_;
    mutable std::shared_mutex mutex_;
    std::vector<DatasetRecord> records_;
    std::map<std::string, std::size_t> by_id_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, std::shared_ptr<const Table>> cache_;
};

}  // namespace explore
