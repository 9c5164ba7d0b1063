#include "slc/adapters.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "slc/error.hpp"

namespace fs = std::filesystem;

namespace slc {
namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

// Scratch file removed on scope exit.
class TempFile {
 public:
  explicit TempFile(const std::string& suffix) {
    static std::atomic<unsigned long> counter{0};
    path_ = fs::temp_directory_path() /
            ("slc-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)) + suffix);
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct CommandOutput {
  int status;
  std::string stdout_text;
};

CommandOutput run_command(const std::string& cmdline) {
  FILE* pipe = ::popen(cmdline.c_str(), "r");
  if (pipe == nullptr)
    throw Error(ErrorKind::transport, "cannot spawn: " + cmdline);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {status, std::move(out)};
}

OcrResult parse_ocr_line(const std::string& output, const std::string& who) {
  const std::string line = output.substr(0, output.find('\n'));
  const std::size_t tab = line.find('\t');
  if (tab == std::string::npos)
    throw Error(ErrorKind::protocol, who + ": expected '<confidence>\\t<text>'");
  OcrResult r;
  try {
    std::size_t used = 0;
    r.confidence = std::stod(line.substr(0, tab), &used);
    if (used != tab) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw Error(ErrorKind::protocol, who + ": bad confidence field");
  }
  r.text = line.substr(tab + 1);
  if (!r.text.empty() && r.text.back() == '\r') r.text.pop_back();
  if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
    throw Error(ErrorKind::protocol, who + ": confidence outside [0,1]");
  if (r.text.empty()) throw Error(ErrorKind::protocol, who + ": empty text");
  return r;
}

}  // namespace

std::string image_digest(const GrayImage& image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int v : {image.width, image.height})
    for (int shift = 0; shift < 32; shift += 8)
      mix(static_cast<std::uint8_t>((static_cast<std::uint32_t>(v) >> shift) & 0xff));
  for (std::uint8_t p : image.pixels) mix(p >= 128 ? 1 : 0);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 0xf];
  return out;
}

MockOcr MockOcr::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "missing mock OCR table " + path.string());
  MockOcr mock;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw Error(ErrorKind::data, path.string() + ":" + std::to_string(lineno) +
                                       ": expected digest, confidence, text");
    mock.add(line.substr(0, t1),
             OcrResult{line.substr(t2 + 1), std::stod(line.substr(t1 + 1, t2 - t1 - 1))});
  }
  return mock;
}

void MockOcr::save(const fs::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::data, "cannot write " + path.string());
  for (const auto& [digest, r] : table_)
    out << digest << '\t' << r.confidence << '\t' << r.text << '\n';
}

OcrResult MockOcr::recognize(const GrayImage& image) const {
  const std::string key = image_digest(image);
  const auto it = table_.find(key);
  if (it == table_.end())
    throw Error(ErrorKind::protocol, "mock OCR has no entry for image " + key);
  return it->second;
}

OcrResult CommandOcr::recognize(const GrayImage& image) const {
  TempFile tmp(".pgm");
  write_pgm(tmp.path(), image);
  const CommandOutput out =
      run_command(command_ + " " + shell_quote(tmp.path().string()));
  if (out.status != 0)
    throw Error(ErrorKind::transport, "OCR command failed (status " +
                                          std::to_string(out.status) + "): " + command_);
  return parse_ocr_line(out.stdout_text, "OCR command");
}

HttpOcr::HttpOcr(std::string url, double timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
  const std::size_t scheme = url.find("://");
  const std::size_t slash =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  origin_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (origin_.empty()) throw Error(ErrorKind::usage, "bad OCR URL: " + url);
}

OcrResult HttpOcr::recognize(const GrayImage& image) const {
  httplib::Client client(origin_);
  const auto timeout = std::chrono::duration<double>(timeout_seconds_);
  client.set_connection_timeout(
      std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  auto res = client.Post(path_, encode_pgm(image), "image/x-portable-graymap");
  if (!res)
    throw Error(ErrorKind::transport,
                "OCR endpoint " + origin_ + path_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorKind::protocol,
                "OCR endpoint answered HTTP " + std::to_string(res->status));
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::protocol, "OCR endpoint returned invalid JSON");
  }
  if (!body.is_object() || !body.contains("text") || !body["text"].is_string() ||
      !body.contains("confidence") || !body["confidence"].is_number())
    throw Error(ErrorKind::protocol, "OCR payload lacks text/confidence");
  OcrResult r{body["text"].get<std::string>(), body["confidence"].get<double>()};
  if (r.text.empty()) throw Error(ErrorKind::protocol, "OCR endpoint returned empty text");
  return r;
}

std::unique_ptr<OcrAdapter> make_ocr_adapter(const OcrConfig& config) {
  if (config.kind == "mock") return std::make_unique<MockOcr>(MockOcr::load(config.endpoint));
  if (config.kind == "command") return std::make_unique<CommandOcr>(config.endpoint);
  if (config.kind == "http") return std::make_unique<HttpOcr>(config.endpoint);
  throw Error(ErrorKind::usage, "ocr: unknown adapter kind '" + config.kind + "'");
}

SubtitleClip run_ocr(SubtitleClip clip, const OcrAdapter& adapter) {
  const OcrResult r =
      adapter.recognize(to_gray_image(clip.mean_frame, clip.width, clip.height));
  clip.text = r.text;
  clip.ocr_confidence = r.confidence;
  return clip;
}

std::vector<SubtitleClip> run_ocr_batch(std::vector<SubtitleClip> clips,
                                        const OcrAdapter& adapter,
                                        std::size_t workers) {
  workers = std::max<std::size_t>(1, std::min(workers, clips.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < clips.size();) {
      try {
        clips[i] = run_ocr(std::move(clips[i]), adapter);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = clips.size();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (first_error) std::rethrow_exception(first_error);
  return clips;
}

FrameStream CommandCleaner::clean(const FrameStream& frames) const {
  TempFile in(".raw"), out(".raw");
  write_raw_planar(in.path(), frames);
  const CommandOutput r = run_command(command_ + " " + shell_quote(in.path().string()) +
                                      " " + shell_quote(out.path().string()));
  if (r.status != 0)
    throw Error(ErrorKind::transport, "cleaner command failed (status " +
                                          std::to_string(r.status) + "): " + command_);
  FrameStream cleaned;
  try {
    cleaned = read_raw_planar(out.path(), frames.episode_id(), frames.fps());
  } catch (const Error& e) {
    throw Error(ErrorKind::protocol, std::string("cleaner output: ") + e.what());
  }
  if (cleaned.width() != frames.width() || cleaned.height() != frames.height() ||
      cleaned.frame_count() != frames.frame_count())
    throw Error(ErrorKind::protocol, "cleaner changed the stream geometry");
  return cleaned;
}

std::unique_ptr<CleanerAdapter> make_cleaner(const std::string& kind,
                                             const std::string& command) {
  if (kind == "passthrough") return std::make_unique<PassthroughCleaner>();
  if (kind == "command") return std::make_unique<CommandCleaner>(command);
  throw Error(ErrorKind::usage, "cleaner: unknown adapter kind '" + kind + "'");
}

}  // namespace slc
