#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "explore/dataset_store.hpp"

namespace explore::service {

struct Config {
    std::filesystem::path data_dir = "explore-data";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_upload_bytes = kDefaultMaxUploadBytes;

    /// Overrides from EXPLORE_DATA_DIR, EXPLORE_HOST, EXPLORE_PORT and EXPLORE_MAX_UPLOAD_BYTES.
    static Config from_environment(Config base);
};

struct UploadedFile {
    std::string filename;
    std::string content;
};

/// Transport-independent request. Multipart uploads arrive in `file` and `form`; any other body
/// stays in `body`.
struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::string content_type;
    std::optional<UploadedFile> file;
    std::map<std::string, std::string> form;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class Service {
public:
    explicit Service(const Config& config);

    /// Routes one request. Never throws; failures become JSON error bodies.
    ApiResponse handle(const ApiRequest& request);

    /// Blocks serving HTTP until stop() is called. Returns false if the socket could not be bound.
    bool listen();
    /// Binds to an ephemeral port on config.host and returns it; serve with listen_after_bind().
    int bind_any_port();
    bool listen_after_bind();
    void stop();
    bool running() const;

    DatasetStore& store() noexcept { return store_; }
    const Config& config() const noexcept { return config_; }

private:
    struct Http;

    ApiResponse route(const ApiRequest& request);
    ApiResponse upload(const ApiRequest& request);

    Config config_;
    DatasetStore store_;
    std::shared_ptr<Http> http_;
};

}  // namespace explore::service
