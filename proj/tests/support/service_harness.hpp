#pragma once

// In-process helpers for driving the service: scratch data directories and request builders.

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "explore/service.hpp"

namespace harness {

using Json = nlohmann::json;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("explore-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline explore::service::Config config_for(const std::filesystem::path& dir, std::size_t max_bytes = 1 << 20) {
    explore::service::Config c;
    c.data_dir = dir;
    c.max_upload_bytes = max_bytes;
    return c;
}

inline explore::service::ApiResponse get(explore::service::Service& s, const std::string& path,
                                         std::map<std::string, std::string> query = {}) {
    explore::service::ApiRequest r;
    r.method = "GET";
    r.path = path;
    r.query = std::move(query);
    return s.handle(r);
}

inline explore::service::ApiResponse post(explore::service::Service& s, const std::string& path,
                                          const std::string& body) {
    explore::service::ApiRequest r;
    r.method = "POST";
    r.path = path;
    r.body = body;
    r.content_type = "application/json";
    return s.handle(r);
}

inline explore::service::ApiResponse post(explore::service::Service& s, const std::string& path, const Json& body) {
    return post(s, path, body.dump());
}

/// Multipart-style upload of CSV bytes.
inline explore::service::ApiResponse upload(explore::service::Service& s, const std::string& csv,
                                            const std::string& name = "data.csv",
                                            std::map<std::string, std::string> form = {}) {
    explore::service::ApiRequest r;
    r.method = "POST";
    r.path = "/api/datasets";
    r.file = explore::service::UploadedFile{name, csv};
    r.form = std::move(form);
    return s.handle(r);
}

inline Json body(const explore::service::ApiResponse& r) { return Json::parse(r.body); }

inline std::string error_code(const explore::service::ApiResponse& r) {
    const auto j = Json::parse(r.body);
    return j.contains("error") ? j["error"]["code"].get<std::string>() : std::string();
}

}  // namespace harness
