#pragma once

// HTTP/JSON service over a loaded index. JSON field names are documented in
// api/schema.json.

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mathsearch/index.hpp"
#include "mathsearch/query.hpp"

namespace httplib {
class Server;
}

namespace mathsearch {

inline constexpr std::size_t kDefaultHitCount = 20;

/// Shared, immutable index with atomic replacement.
class IndexHandle {
 public:
  explicit IndexHandle(std::shared_ptr<const Index> index);

  /// The current index, or nullptr while a swap is in progress.
  std::shared_ptr<const Index> acquire() const;
  bool swapping() const noexcept { return swapping_.load(); }

  /// Readers see "swapping" until the returned guard is released.
  class SwapGuard {
   public:
    explicit SwapGuard(IndexHandle& handle) : handle_(&handle) {}
    SwapGuard(SwapGuard&& other) noexcept : handle_(other.handle_) {
      other.handle_ = nullptr;
    }
    SwapGuard(const SwapGuard&) = delete;
    SwapGuard& operator=(const SwapGuard&) = delete;
    SwapGuard& operator=(SwapGuard&&) = delete;
    ~SwapGuard();

    void commit(std::shared_ptr<const Index> next);

   private:
    IndexHandle* handle_;
  };

  /// Throws std::logic_error if a swap is already running.
  SwapGuard begin_swap();
  /// Loads an index directory and swaps it in.
  void reload(const std::filesystem::path& dir);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Index> index_;
  std::atomic<bool> swapping_{false};
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// JSON body shared by the CLI `query` command and GET /api/search.
std::string render_search_response(const Query& query,
                                   const std::vector<SearchHit>& hits,
                                   std::size_t k, double elapsed_ms);
std::string render_error(std::string_view message,
                         const std::vector<QueryParseError::Fragment>& fragments = {});

/// GET /api/search?q=&k=&alpha=
ApiResponse api_search(const IndexHandle& handle, std::string_view q,
                       std::optional<std::string> k,
                       std::optional<std::string> alpha);
/// GET /api/health
ApiResponse api_health(const IndexHandle& handle);

struct ServerOptions {
  /// Static UI assets served at "/".
  std::optional<std::filesystem::path> static_dir;
  /// Enables POST /api/reload, which re-reads this directory.
  std::optional<std::filesystem::path> index_dir;
};

void install_routes(httplib::Server& server, IndexHandle& handle,
                    const ServerOptions& options);

}  // namespace mathsearch
