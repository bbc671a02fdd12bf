#include "explore/service.hpp"

#include <charconv>
#include <cstdlib>
#include <vector>

#include "httplib.h"

#include "explore/json_codec.hpp"
#include "explore/operations.hpp"

namespace explore::service {

using Json = nlohmann::json;

struct Service::Http {
    httplib::Server server;
};

namespace {

ApiResponse json_response(int status, const Json& body) {
    return {status, body.dump(), "application/json"};
}

ApiResponse error_response(const Error& error) {
    return json_response(http_status(error.code()), codec::encode(error));
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos < path.size()) {
        const auto slash = path.find('/', pos);
        const auto end = slash == std::string::npos ? path.size() : slash;
        if (end > pos) {
            parts.push_back(path.substr(pos, end - pos));
        }
        pos = end + 1;
    }
    return parts;
}

std::optional<std::size_t> parse_size(const std::string& text) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return v;
}

Json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
        return Json::object();
    }
    try {
        auto json = Json::parse(body);
        if (!json.is_object()) {
            throw Error(ErrorCode::bad_request, "request body must be a JSON object");
        }
        return json;
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::bad_request, std::string("request body is not valid JSON: ") + e.what());
    }
}

std::string lookup(const ApiRequest& request, const std::string& key) {
    if (const auto it = request.form.find(key); it != request.form.end()) {
        return it->second;
    }
    if (const auto it = request.query.find(key); it != request.query.end()) {
        return it->second;
    }
    return {};
}

ParseOptions upload_options(const ApiRequest& request) {
    ParseOptions options;
    if (const auto d = lookup(request, "delimiter"); !d.empty()) {
        const std::string delimiter = d == "\\t" || d == "tab" ? "\t" : d;
        if (delimiter.size() != 1) {
            throw Error(ErrorCode::bad_request, "delimiter must be a single character");
        }
        options.delimiter = delimiter[0];
    }
    if (const auto h = lookup(request, "has_header"); !h.empty()) {
        if (h != "true" && h != "false") {
            throw Error(ErrorCode::bad_request, "has_header must be true or false");
        }
        options.has_header = h == "true";
    }
    if (const auto t = lookup(request, "na_tokens"); !t.empty()) {
        Json tokens;
        try {
            tokens = Json::parse(t);
        } catch (const Json::parse_error&) {
            throw Error(ErrorCode::bad_request, "na_tokens must be a JSON array of strings");
        }
        options = codec::decode_parse_options(Json{{"delimiter", std::string(1, options.delimiter)},
                                                   {"has_header", options.has_header},
                                                   {"na_tokens", tokens}});
    }
    return options;
}

bool wants_materialize(const Json& request) {
    const auto it = request.find("materialize");
    if (it == request.end() || it->is_null()) {
        return false;
    }
    if (!it->is_boolean()) {
        throw Error(ErrorCode::bad_request, "field 'materialize' must be a boolean");
    }
    return it->get<bool>();
}

}  // namespace

Config Config::from_environment(Config base) {
    if (const char* v = std::getenv("EXPLORE_DATA_DIR"); v && *v) {
        base.data_dir = v;
    }
    if (const char* v = std::getenv("EXPLORE_HOST"); v && *v) {
        base.host = v;
    }
    if (const char* v = std::getenv("EXPLORE_PORT"); v && *v) {
        if (auto port = parse_size(v); port && *port <= 65535) {
            base.port = static_cast<int>(*port);
        }
    }
    if (const char* v = std::getenv("EXPLORE_MAX_UPLOAD_BYTES"); v && *v) {
        if (auto bytes = parse_size(v)) {
            base.max_upload_bytes = *bytes;
        }
    }
    return base;
}

Service::Service(const Config& config)
    : config_(config), store_(config.data_dir, config.max_upload_bytes), http_(std::make_shared<Http>()) {
    auto& server = http_->server;
    // Multipart framing adds a little on top of the file itself; the store enforces the exact limit.
    server.set_payload_max_length(config_.max_upload_bytes + 64 * 1024);
    auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest request;
        request.method = req.method;
        request.path = req.path;
        for (const auto& [k, v] : req.params) {
            request.query.emplace(k, v);
        }
        request.content_type = req.get_header_value("Content-Type");
        if (req.is_multipart_form_data()) {
            for (const auto& [key, part] : req.files) {
                if (key == "file" && part.filename.size() + part.content.size() > 0 && !request.file) {
                    request.file = UploadedFile{part.filename, part.content};
                } else if (part.filename.empty()) {
                    request.form.emplace(key, part.content);
                }
            }
            if (!request.file && req.has_file("file")) {
                const auto part = req.get_file_value("file");
                request.file = UploadedFile{part.filename, part.content};
            }
        } else {
            request.body = req.body;
        }
        const auto response = handle(request);
        res.status = response.status;
        res.set_content(response.body, response.content_type);
    };
    const std::string any = R"(/.*)";
    server.Get(any, adapter);
    server.Post(any, adapter);
    server.Put(any, adapter);
    server.Delete(any, adapter);
    server.Patch(any, adapter);
    server.Options(any, [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
    });
    server.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) {
            return;
        }
        const auto code = res.status == 413 ? ErrorCode::payload_too_large
                          : res.status == 404 ? ErrorCode::not_found
                          : res.status >= 500 ? ErrorCode::internal_error
                                              : ErrorCode::bad_request;
        const Error error(code, res.status == 413 ? "upload exceeds the size limit" : "request rejected",
                          res.status == 413 ? Json{{"max_bytes", config_.max_upload_bytes}} : Json(nullptr));
        res.set_content(codec::encode(error).dump(), "application/json");
    });
}

ApiResponse Service::handle(const ApiRequest& request) {
    try {
        return route(request);
    } catch (const Error& e) {
        return error_response(e);
    } catch (const std::exception& e) {
        return error_response(Error(ErrorCode::internal_error, e.what()));
    }
}

ApiResponse Service::upload(const ApiRequest& request) {
    std::string name = lookup(request, "name");
    std::string_view bytes = request.body;
    if (request.file) {
        bytes = request.file->content;
        if (name.empty()) {
            name = request.file->filename;
        }
    }
    if (name.empty()) {
        name = "data";
    }
    const auto record = store_.store(bytes, name, upload_options(request));
    return json_response(201, to_json(record));
}

ApiResponse Service::route(const ApiRequest& request) {
    const auto parts = split_path(request.path);
    const auto& m = request.method;
    auto not_found = [&]() -> ApiResponse {
        throw Error(ErrorCode::not_found, "no route for " + m + " " + request.path,
                    {{"method", m}, {"path", request.path}});
    };

    if (parts.size() == 1 && parts[0] == "healthz" && m == "GET") {
        return json_response(200, {{"status", "ok"}});
    }
    if (parts.size() < 2 || parts[0] != "api" || parts[1] != "datasets") {
        return not_found();
    }
    if (parts.size() == 2) {
        if (m == "GET") {
            Json list = Json::array();
            for (const auto& r : store_.list()) {
                list.push_back(to_json(r));
            }
            return json_response(200, list);
        }
        if (m == "POST") {
            return upload(request);
        }
        return not_found();
    }
    if (parts.size() != 4) {
        return not_found();
    }
    const auto& id = parts[2];
    const auto& operation = parts[3];
    const bool is_get = operation == "schema" || operation == "rows";
    if (!ops::is_operation(operation) || (is_get ? m != "GET" : m != "POST")) {
        return not_found();
    }
    const auto table = store_.load(id);

    Json body = Json::object();
    if (operation == "rows") {
        for (const char* key : {"offset", "limit"}) {
            if (const auto it = request.query.find(key); it != request.query.end()) {
                const auto v = parse_size(it->second);
                if (!v) {
                    throw Error(ErrorCode::bad_request, std::string("query parameter '") + key +
                                                            "' must be a non-negative integer");
                }
                body[key] = *v;
            }
        }
    } else if (!is_get) {
        body = parse_body(request.body);
    }

    auto result = ops::run(operation, *table, body);
    if ((operation == "filter" || operation == "select" || operation == "aggregate") && wants_materialize(body)) {
        std::string name = table->name() + "-" + operation;
        if (const auto it = body.find("name"); it != body.end() && it->is_string()) {
            name = it->get<std::string>();
        }
        const auto record = store_.store_table(codec::decode_table(result), name);
        return json_response(201, to_json(record));
    }
    return json_response(200, result);
}

bool Service::listen() {
    return http_->server.listen(config_.host, config_.port);
}

int Service::bind_any_port() {
    return http_->server.bind_to_any_port(config_.host);
}

bool Service::listen_after_bind() {
    return http_->server.listen_after_bind();
}

void Service::stop() {
    http_->server.stop();
}

bool Service::running() const {
    return http_->server.is_running();
}

}  // namespace explore::service
