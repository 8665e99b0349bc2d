#include "panoreduce/detect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "panoreduce/io.hpp"

namespace panoreduce {

void BlurParams::validate() const {
    if (!(sigma_frac > 0.0)) throw ConfigError("blur.sigma_frac must be > 0");
    if (pad_px < 0) throw ConfigError("blur.pad_px must be >= 0");
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0))
        throw ConfigError("blur.score_threshold must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// Oracle detector
// ---------------------------------------------------------------------------

OracleDetector::OracleDetector(std::vector<GroundTruthObject> truth, int pano_width,
                               double min_visible_frac)
    : truth_(std::move(truth)), pano_width_(pano_width), min_visible_frac_(min_visible_frac) {}

std::vector<DetectionRecord> OracleDetector::detect(const Patch& patch) {
    // Work in the patch's unwrapped column range [u0, u0 + width); ground
    // truth boxes are tried at shifts of +-W to cover the seam.
    const Box patch_box{static_cast<double>(patch.u0), static_cast<double>(patch.v0),
                        static_cast<double>(patch.u0 + patch.width),
                        static_cast<double>(patch.v0 + patch.height)};
    std::vector<DetectionRecord> out;
    for (const auto& gt : truth_) {
        Box best;
        double best_area = 0.0;
        for (const int shift : {-pano_width_, 0, pano_width_}) {
            Box shifted = gt.box;
            shifted.u_min += shift;
            shifted.u_max += shift;
            const Box clip = intersect(shifted, patch_box);
            if (!clip.valid()) continue;
            if (clip.area() > best_area) {
                best_area = clip.area();
                best = clip;
            }
        }
        if (best_area < min_visible_frac_ * gt.box.area() || best_area <= 0.0) continue;
        DetectionRecord d;
        d.cls = gt.cls;
        d.box = {best.u_min - patch.u0, best.v_min - patch.v0, best.u_max - patch.u0,
                 best.v_max - patch.v0};
        d.score = 1.0;
        out.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// External detector: child processes speaking line-delimited JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

class ChildProcess {
public:
    explicit ChildProcess(const std::vector<std::string>& argv) {
        int to_child[2];
        int from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw DetectorError("failed to create adapter pipes");
        pid_ = fork();
        if (pid_ < 0) throw DetectorError("failed to fork adapter process");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            std::vector<char*> args;
            for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
            args.push_back(nullptr);
            execvp(args[0], args.data());
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        stdin_fd_ = to_child[1];
        stdout_fd_ = from_child[0];
    }

    ~ChildProcess() {
        if (stdin_fd_ >= 0) close(stdin_fd_);
        if (stdout_fd_ >= 0) close(stdout_fd_);
        if (pid_ > 0) {
            int status = 0;
            // Give the adapter a moment to exit after stdin closes.
            for (int i = 0; i < 50; ++i) {
                if (waitpid(pid_, &status, WNOHANG) != 0) return;
                usleep(10000);
            }
            kill(pid_, SIGKILL);
            waitpid(pid_, &status, 0);
        }
    }

    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    void send_line(const std::string& line) {
        std::string payload = line + "\n";
        std::size_t off = 0;
        while (off < payload.size()) {
            const ssize_t n = write(stdin_fd_, payload.data() + off, payload.size() - off);
            if (n <= 0) throw DetectorError("adapter process closed its input (exited?)");
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(double timeout_s) {
        for (;;) {
            const auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            pollfd pfd{stdout_fd_, POLLIN, 0};
            const int rc = poll(&pfd, 1, static_cast<int>(timeout_s * 1000.0));
            if (rc == 0) throw DetectorError("adapter response timed out");
            if (rc < 0) throw DetectorError("poll on adapter pipe failed");
            char chunk[4096];
            const ssize_t n = read(stdout_fd_, chunk, sizeof chunk);
            if (n == 0) throw DetectorError("adapter process exited before responding");
            if (n < 0) throw DetectorError("read from adapter pipe failed");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    std::string buffer_;
};

std::vector<DetectionRecord> parse_response(const std::string& line, const Patch& patch) {
    const auto fail = [&line](const std::string& what) -> void {
        throw DetectorError("adapter protocol violation: " + what + "; raw line: " + line);
    };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail("response is not valid JSON");
    if (!j.is_object() || !j.contains("detections") || !j["detections"].is_array())
        fail("expected {\"detections\": [...]}");
    std::vector<DetectionRecord> out;
    for (const auto& jd : j["detections"]) {
        if (!jd.is_object() || !jd.contains("class") || !jd.contains("box") ||
            !jd.contains("score"))
            fail("detection entries need class, box and score");
        DetectionRecord d;
        try {
            d.cls = object_class_from_string(jd["class"].get<std::string>());
        } catch (const std::exception&) {
            fail("unknown class");
        }
        const auto& box = jd["box"];
        if (!box.is_array() || box.size() != 4 || !box[0].is_number() || !box[1].is_number() ||
            !box[2].is_number() || !box[3].is_number())
            fail("box must be [x0, y0, x1, y1]");
        d.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                 box[3].get<double>()};
        if (!jd["score"].is_number()) fail("score must be a number");
        d.score = jd["score"].get<double>();
        if (std::isnan(d.score) || d.score < 0.0 || d.score > 1.0) fail("score outside [0, 1]");
        if (!d.box.valid() || d.box.u_min < 0.0 || d.box.v_min < 0.0 ||
            d.box.u_max > patch.width || d.box.v_max > patch.height)
            fail("box outside patch bounds");
        out.push_back(d);
    }
    return out;
}

}  // namespace

struct ExternalDetector::Impl {
    ExternalDetectorConfig config;
    bool owns_tmp_dir = false;
    std::vector<std::unique_ptr<ChildProcess>> idle;
    std::mutex mu;
    std::condition_variable cv;
    int live = 0;
    std::uint64_t patch_counter = 0;

    std::unique_ptr<ChildProcess> checkout() {
        std::unique_lock lock(mu);
        for (;;) {
            if (!idle.empty()) {
                auto child = std::move(idle.back());
                idle.pop_back();
                return child;
            }
            if (live < config.max_parallelism) {
                ++live;
                lock.unlock();
                try {
                    return std::make_unique<ChildProcess>(config.command);
                } catch (...) {
                    lock.lock();
                    --live;
                    throw;
                }
            }
            cv.wait(lock);
        }
    }

    void checkin(std::unique_ptr<ChildProcess> child) {
        {
            std::lock_guard lock(mu);
            if (child)
                idle.push_back(std::move(child));
            else
                --live;  // broken child is dropped
        }
        cv.notify_one();
    }
};

ExternalDetector::ExternalDetector(ExternalDetectorConfig config)
    : impl_(std::make_unique<Impl>()) {
    if (config.command.empty()) throw ConfigError("external detector needs a command");
    if (config.max_parallelism < 1) throw ConfigError("detector.max_parallelism must be >= 1");
    if (!(config.timeout_s > 0.0)) throw ConfigError("detector.timeout_s must be > 0");
    if (config.tmp_dir.empty()) {
        const char* env = std::getenv("PANO_REDUCE_TMPDIR");
        auto base = env ? std::filesystem::path(env)
                        : std::filesystem::temp_directory_path();
        static std::atomic<int> run_id{0};
        config.tmp_dir = (base / ("pano-reduce-" + std::to_string(getpid()) + "-" +
                                  std::to_string(run_id.fetch_add(1))))
                             .string();
        impl_->owns_tmp_dir = true;
    }
    std::filesystem::create_directories(config.tmp_dir);
    impl_->config = std::move(config);
}

ExternalDetector::~ExternalDetector() {
    impl_->idle.clear();  // reap children before removing their patch files
    if (impl_->owns_tmp_dir) {
        std::error_code ec;
        std::filesystem::remove_all(impl_->config.tmp_dir, ec);
    }
}

int ExternalDetector::max_parallelism() const { return impl_->config.max_parallelism; }

std::vector<DetectionRecord> ExternalDetector::detect(const Patch& patch) {
    std::uint64_t index = 0;
    {
        std::lock_guard lock(impl_->mu);
        index = impl_->patch_counter++;
    }
    const std::string patch_path =
        (std::filesystem::path(impl_->config.tmp_dir) /
         ("patch_" + std::to_string(index) + "_" + std::to_string(patch.u0) + "_" +
          std::to_string(patch.v0) + ".ppm"))
            .string();
    write_rgb(patch.pixels, patch_path);

    json request = {{"patch_path", patch_path},
                    {"origin", {patch.u0, patch.v0}},
                    {"width", patch.width},
                    {"height", patch.height}};

    auto child = impl_->checkout();
    try {
        child->send_line(request.dump());
        const std::string line = child->read_line(impl_->config.timeout_s);
        auto result = parse_response(line, patch);
        impl_->checkin(std::move(child));
        return result;
    } catch (...) {
        impl_->checkin(nullptr);  // do not reuse a child in an unknown state
        throw;
    }
}

// ---------------------------------------------------------------------------
// Blur
// ---------------------------------------------------------------------------

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * (i / sigma) * (i / sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (auto& w : k) w /= sum;
    return k;
}

// Reads wrap horizontally (panorama seam) and clamp vertically.
inline int wrap_u(int u, int w) {
    u %= w;
    return u < 0 ? u + w : u;
}

}  // namespace

ImageRgb blur_regions(const ImageRgb& pano, const std::vector<DetectionRecord>& detections,
                      const BlurParams& params) {
    params.validate();
    ImageRgb out = pano;
    const int w = pano.width;
    const int h = pano.height;

    for (const auto& det : detections) {
        if (det.score < params.score_threshold) continue;
        const Box& b = det.box;
        if (!b.valid()) continue;
        const double sigma = params.sigma_frac * std::min(b.width(), b.height());
        if (sigma <= 0.0) continue;
        const auto kernel = gaussian_kernel(sigma);
        const int radius = (static_cast<int>(kernel.size()) - 1) / 2;

        const int u0 = static_cast<int>(std::floor(b.u_min)) - params.pad_px;
        const int u1 = static_cast<int>(std::ceil(b.u_max)) + params.pad_px;  // exclusive
        const int v0 = std::max(0, static_cast<int>(std::floor(b.v_min)) - params.pad_px);
        const int v1 = std::min(h, static_cast<int>(std::ceil(b.v_max)) + params.pad_px);
        const int bw = u1 - u0;
        const int bh = v1 - v0;
        if (bw <= 0 || bh <= 0) continue;

        // Horizontal pass over the region plus vertical apron, from the
        // original image; vertical pass writes the region.
        const int a0 = std::max(0, v0 - radius);
        const int a1 = std::min(h, v1 + radius);
        const int ah = a1 - a0;
        std::vector<float> tmp(static_cast<std::size_t>(3) * bw * ah);
        for (int v = a0; v < a1; ++v) {
            for (int x = 0; x < bw; ++x) {
                double acc[3] = {0.0, 0.0, 0.0};
                for (int k = -radius; k <= radius; ++k) {
                    const int su = wrap_u(u0 + x + k, w);
                    const auto* p = pano.at(su, v);
                    const double wk = kernel[static_cast<std::size_t>(k + radius)];
                    acc[0] += wk * p[0];
                    acc[1] += wk * p[1];
                    acc[2] += wk * p[2];
                }
                float* t = tmp.data() + 3 * (static_cast<std::size_t>(v - a0) * bw + x);
                t[0] = static_cast<float>(acc[0]);
                t[1] = static_cast<float>(acc[1]);
                t[2] = static_cast<float>(acc[2]);
            }
        }
        for (int v = v0; v < v1; ++v) {
            for (int x = 0; x < bw; ++x) {
                double acc[3] = {0.0, 0.0, 0.0};
                for (int k = -radius; k <= radius; ++k) {
                    const int sv = std::clamp(v + k, a0, a1 - 1);
                    const float* t =
                        tmp.data() + 3 * (static_cast<std::size_t>(sv - a0) * bw + x);
                    const double wk = kernel[static_cast<std::size_t>(k + radius)];
                    acc[0] += wk * t[0];
                    acc[1] += wk * t[1];
                    acc[2] += wk * t[2];
                }
                auto* q = out.at(wrap_u(u0 + x, w), v);
                q[0] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[0]), 0L, 255L));
                q[1] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[1]), 0L, 255L));
                q[2] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[2]), 0L, 255L));
            }
        }
    }
    return out;
}

}  // namespace panoreduce
