// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/nn/attention.hpp"

#include <cmath>
#include <cstring>
#include <mutex>

#include "ssiu/core/parallel.hpp"
#include "ssiu/kernels/kernels.hpp"

namespace ssiu::nn {

namespace k = ssiu::kernels;

BlockGrid make_block_grid(int H1, int W1, int M, int O) {
  SSIU_CHECK(M >= 1, "block size must be >= 1");
  SSIU_CHECK(O >= 0 && O < M, "overlap must satisfy 0 <= O < M, got O=" << O << " M=" << M);
  BlockGrid g;
  g.H1 = H1;
  g.W1 = W1;
  g.M = M;
  g.O = O;
  g.step = M - O;
  auto axis = [&](int size, int* padded, int* count) {
    int steps = size <= M ? 0 : (size - M + g.step - 1) / g.step;
    *padded = M + steps * g.step;
    *count = steps + 1;
  };
  axis(H1, &g.Hp, &g.nh);
  axis(W1, &g.Wp, &g.nw);
  return g;
}

namespace {

std::vector<int> coverage_counts(const BlockGrid& g) {
  std::vector<int> count(size_t(g.Hp) * g.Wp, 0);
  for (int bh = 0; bh < g.nh; ++bh)
    for (int bw = 0; bw < g.nw; ++bw)
      for (int i = 0; i < g.M; ++i) {
        int y = bh * g.step + i;
        int* row = count.data() + size_t(y) * g.Wp + bw * g.step;
        for (int j = 0; j < g.M; ++j) row[j] += 1;
      }
  return count;
}

}  // namespace

template <class T>
Tensor<T> partition_tokens(const Tensor<T>& x, const BlockGrid& g, int heads) {
  int N = x.n(), C = x.c();
  SSIU_CHECK(x.h() == g.H1 && x.w() == g.W1, "partition grid/input mismatch");
  SSIU_CHECK(C % heads == 0, "channels " << C << " not divisible by heads " << heads);
  int dk = C / heads;
  int n_tok = g.tokens();
  int blocks = g.blocks();
  Tensor<T> tokens(N * blocks, heads, n_tok, dk);
  parallel_for(0, int64_t(N) * blocks * heads, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int h = int(idx % heads);
      int b = int((idx / heads) % blocks);
      int n = int(idx / (int64_t(heads) * blocks));
      int y0 = (b / g.nw) * g.step;
      int x0 = (b % g.nw) * g.step;
      T* out = tokens.plane(n * blocks + b, h);
      for (int i = 0; i < g.M; ++i) {
        int yy = fold_index(y0 + i, g.H1);
        for (int j = 0; j < g.M; ++j) {
          int xx = fold_index(x0 + j, g.W1);
          T* dst = out + (size_t(i) * g.M + j) * dk;
          for (int d = 0; d < dk; ++d)
            dst[d] = x.plane(n, h * dk + d)[size_t(yy) * g.W1 + xx];
        }
      }
    }
  });
  return tokens;
}

template <class T>
Tensor<T> partition_tokens_adjoint(const Tensor<T>& tokens, const BlockGrid& g, int heads,
                                   Shape4 x_shape) {
  int N = x_shape.n, C = x_shape.c;
  int dk = C / heads;
  int blocks = g.blocks();
  Tensor<T> dx = Tensor<T>::zeros(N, C, g.H1, g.W1);
  // One (n, head) pair per task: all writes for a channel group stay in one
  // task, so scatter-adds race-free and ordered.
  parallel_for(0, int64_t(N) * heads, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int h = int(idx % heads);
      int n = int(idx / heads);
      for (int b = 0; b < blocks; ++b) {
        int y0 = (b / g.nw) * g.step;
        int x0 = (b % g.nw) * g.step;
        const T* src = tokens.plane(n * blocks + b, h);
        for (int i = 0; i < g.M; ++i) {
          int yy = fold_index(y0 + i, g.H1);
          for (int j = 0; j < g.M; ++j) {
            int xx = fold_index(x0 + j, g.W1);
            const T* tok = src + (size_t(i) * g.M + j) * dk;
            for (int d = 0; d < dk; ++d)
              dx.plane(n, h * dk + d)[size_t(yy) * g.W1 + xx] += tok[d];
          }
        }
      }
    }
  });
  return dx;
}

template <class T>
Tensor<T> merge_tokens(const Tensor<T>& tokens, const BlockGrid& g, int heads, int N, int C) {
  int dk = C / heads;
  int blocks = g.blocks();
  SSIU_CHECK(tokens.n() == N * blocks && tokens.c() == heads, "merge token shape mismatch");
  std::vector<int> count = coverage_counts(g);
  Tensor<T> out(N, C, g.H1, g.W1);
  parallel_for(0, int64_t(N) * heads, [&](int64_t lo, int64_t hi) {
    std::vector<T> pad(size_t(g.Hp) * g.Wp);
    for (int64_t idx = lo; idx < hi; ++idx) {
      int h = int(idx % heads);
      int n = int(idx / heads);
      for (int d = 0; d < dk; ++d) {
        std::memset(pad.data(), 0, sizeof(T) * pad.size());
        for (int b = 0; b < blocks; ++b) {
          int y0 = (b / g.nw) * g.step;
          int x0 = (b % g.nw) * g.step;
          const T* src = tokens.plane(n * blocks + b, h);
          for (int i = 0; i < g.M; ++i) {
            T* prow = pad.data() + size_t(y0 + i) * g.Wp + x0;
            for (int j = 0; j < g.M; ++j) prow[j] += src[(size_t(i) * g.M + j) * dk + d];
          }
        }
        T* plane = out.plane(n, h * dk + d);
        for (int y = 0; y < g.H1; ++y)
          for (int x = 0; x < g.W1; ++x)
            plane[size_t(y) * g.W1 + x] =
                pad[size_t(y) * g.Wp + x] / T(count[size_t(y) * g.Wp + x]);
      }
    }
  });
  return out;
}

template <class T>
Tensor<T> merge_tokens_adjoint(const Tensor<T>& dmap, const BlockGrid& g, int heads) {
  int N = dmap.n(), C = dmap.c();
  int dk = C / heads;
  int blocks = g.blocks();
  std::vector<int> count = coverage_counts(g);
  Tensor<T> dtok(N * blocks, heads, g.tokens(), dk);
  parallel_for(0, int64_t(N) * blocks * heads, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int h = int(idx % heads);
      int b = int((idx / heads) % blocks);
      int n = int(idx / (int64_t(heads) * blocks));
      int y0 = (b / g.nw) * g.step;
      int x0 = (b % g.nw) * g.step;
      T* dst = dtok.plane(n * blocks + b, h);
      for (int i = 0; i < g.M; ++i) {
        int yy = y0 + i;
        for (int j = 0; j < g.M; ++j) {
          int xx = x0 + j;
          T* tok = dst + (size_t(i) * g.M + j) * dk;
          if (yy >= g.H1 || xx >= g.W1) {
            for (int d = 0; d < dk; ++d) tok[d] = T(0);
            continue;
          }
          T inv = T(1) / T(count[size_t(yy) * g.Wp + xx]);
          for (int d = 0; d < dk; ++d)
            tok[d] = dmap.plane(n, h * dk + d)[size_t(yy) * g.W1 + xx] * inv;
        }
      }
    }
  });
  return dtok;
}

// ---------------------------------------------------------------------------
// AttentionCore
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> AttentionCore<T>::forward(const Tensor<T>& q, const Tensor<T>& kk, const Tensor<T>& v,
                                    Cache* cache, AttentionProbe<T>* probe) {
  SSIU_CHECK(q.shape() == kk.shape() && q.shape() == v.shape(), "attention qkv shape mismatch");
  int NB = q.n(), heads = q.c(), n = q.h(), dk = q.w();
  T scale = T(1) / T(std::sqrt(double(dk)));
  Tensor<T> attn(NB, heads, n, n);
  Tensor<T> out(NB, heads, n, dk);
  parallel_for(0, int64_t(NB) * heads, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int nb = int(idx / heads), h = int(idx % heads);
      T* S = attn.plane(nb, h);
      k::gemm_nt(n, n, dk, q.plane(nb, h), dk, kk.plane(nb, h), dk, S, n, false);
      k::vscale(scale, S, S, size_t(n) * n);
      k::softmax_rows(S, n, n);
      k::gemm_nn(n, dk, n, S, n, v.plane(nb, h), dk, out.plane(nb, h), dk, false);
    }
  });
  if (probe && (probe->capture_row_sums || probe->capture_first_block)) {
    if (probe->capture_row_sums) {
      probe->row_sums.reserve(probe->row_sums.size() + size_t(NB) * heads * n);
      for (int nb = 0; nb < NB; ++nb)
        for (int h = 0; h < heads; ++h) {
          const T* S = attn.plane(nb, h);
          for (int r = 0; r < n; ++r)
            probe->row_sums.push_back(double(k::reduce_sum(S + size_t(r) * n, n)));
        }
    }
    if (probe->capture_first_block && NB > 0) {
      probe->first_block_attn = Tensor<T>(1, heads, n, n);
      std::memcpy(probe->first_block_attn.data(), attn.data(),
                  sizeof(T) * size_t(heads) * n * n);
    }
  }
  if (cache) {
    cache->q = q;
    cache->k = kk;
    cache->v = v;
    cache->attn = attn;
  }
  return out;
}

template <class T>
void AttentionCore<T>::backward(const Cache& cache, const Tensor<T>& dy, Tensor<T>* dq,
                                Tensor<T>* dk_out, Tensor<T>* dv) {
  const Tensor<T>& q = cache.q;
  const Tensor<T>& kk = cache.k;
  const Tensor<T>& v = cache.v;
  const Tensor<T>& attn = cache.attn;
  SSIU_CHECK(!attn.empty(), "attention backward without cached forward");
  int NB = q.n(), heads = q.c(), n = q.h(), dk = q.w();
  T scale = T(1) / T(std::sqrt(double(dk)));
  *dq = Tensor<T>(NB, heads, n, dk);
  *dk_out = Tensor<T>(NB, heads, n, dk);
  *dv = Tensor<T>(NB, heads, n, dk);
  parallel_for(0, int64_t(NB) * heads, [&](int64_t lo, int64_t hi) {
    std::vector<T> dS(size_t(n) * n);
    for (int64_t idx = lo; idx < hi; ++idx) {
      int nb = int(idx / heads), h = int(idx % heads);
      const T* A = attn.plane(nb, h);
      const T* dY = dy.plane(nb, h);
      // dV = A^T dY
      k::gemm_tn(n, dk, n, A, n, dY, dk, dv->plane(nb, h), dk, false);
      // dA = dY V^T
      k::gemm_nt(n, n, dk, dY, dk, v.plane(nb, h), dk, dS.data(), n, false);
      // softmax backward, then fold in the 1/sqrt(dk) scale
      for (int r = 0; r < n; ++r) {
        T* dsrow = dS.data() + size_t(r) * n;
        const T* arow = A + size_t(r) * n;
        T s = k::dot(dsrow, arow, n);
        for (int j = 0; j < n; ++j) dsrow[j] = arow[j] * (dsrow[j] - s) * scale;
      }
      // dQ = dS K ; dK = dS^T Q
      k::gemm_nn(n, dk, n, dS.data(), n, kk.plane(nb, h), dk, dq->plane(nb, h), dk, false);
      k::gemm_tn(n, dk, n, dS.data(), n, q.plane(nb, h), dk, dk_out->plane(nb, h), dk, false);
    }
  });
}

// ---------------------------------------------------------------------------
// ESAM
// ---------------------------------------------------------------------------

void ESAMConfig::validate() const {
  SSIU_CHECK(channels >= 1, "esam channels must be >= 1");
  SSIU_CHECK(pool_kernel >= 1 && pool_stride >= 1, "pool geometry must be >= 1");
  SSIU_CHECK(block_size >= 1 && overlap >= 0 && overlap < block_size,
             "esam requires 0 <= overlap < block_size");
  SSIU_CHECK(num_heads >= 1 && channels % num_heads == 0,
             "channels " << channels << " must divide by heads " << num_heads);
}

template <class T>
ESAM<T>::ESAM(const ESAMConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  proj_q = Conv2d<T>(cfg.channels, cfg.channels, 1);
  proj_k = Conv2d<T>(cfg.channels, cfg.channels, 1);
  proj_v = Conv2d<T>(cfg.channels, cfg.channels, 1);
  psi = Conv2d<T>(cfg.channels, cfg.channels, 3);
  pool = MaxPool2d<T>(cfg.pool_kernel, cfg.pool_stride);
}

template <class T>
Tensor<T> ESAM<T>::forward(const Tensor<T>& x, Cache* cache, AttentionProbe<T>* probe) const {
  SSIU_CHECK(x.c() == cfg_.channels, "esam expects " << cfg_.channels << " channels");
  int H = x.h(), W = x.w();
  Tensor<T> X = cfg_.dense ? x : pool.forward(x, cache ? &cache->pool : nullptr);
  Tensor<T> Q = proj_q.forward(X, cache ? &cache->cq : nullptr);
  Tensor<T> K = proj_k.forward(X, cache ? &cache->ck : nullptr);
  Tensor<T> V = proj_v.forward(X, cache ? &cache->cv : nullptr);
  BlockGrid grid = make_block_grid(X.h(), X.w(), cfg_.block_size, cfg_.overlap);
  Tensor<T> qt = partition_tokens(Q, grid, cfg_.num_heads);
  Tensor<T> kt = partition_tokens(K, grid, cfg_.num_heads);
  Tensor<T> vt = partition_tokens(V, grid, cfg_.num_heads);
  Tensor<T> yt =
      AttentionCore<T>::forward(qt, kt, vt, cache ? &cache->attn : nullptr, probe);
  Tensor<T> merged = merge_tokens(yt, grid, cfg_.num_heads, X.n(), X.c());
  Tensor<T> z = psi.forward(merged, cache ? &cache->cpsi : nullptr);
  Tensor<T> out = BilinearResize<T>::forward(z, H, W, cache ? &cache->up : nullptr);
  if (cache) {
    cache->in_shape = x.shape();
    cache->grid = grid;
  }
  return out;
}

template <class T>
Tensor<T> ESAM<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  const BlockGrid& grid = cache.grid;
  Tensor<T> dz = BilinearResize<T>::backward(cache.up, dy);
  Tensor<T> dmerged = psi.backward(cache.cpsi, dz);
  Tensor<T> dyt = merge_tokens_adjoint(dmerged, grid, cfg_.num_heads);
  Tensor<T> dqt, dkt, dvt;
  AttentionCore<T>::backward(cache.attn, dyt, &dqt, &dkt, &dvt);
  Shape4 xs = cache.cq.input.shape();
  Tensor<T> dQ = partition_tokens_adjoint(dqt, grid, cfg_.num_heads, xs);
  Tensor<T> dK = partition_tokens_adjoint(dkt, grid, cfg_.num_heads, xs);
  Tensor<T> dV = partition_tokens_adjoint(dvt, grid, cfg_.num_heads, xs);
  Tensor<T> dX = proj_q.backward(cache.cq, dQ);
  add_inplace(dX, proj_k.backward(cache.ck, dK));
  add_inplace(dX, proj_v.backward(cache.cv, dV));
  if (cfg_.dense) return dX;
  return pool.backward(cache.pool, dX);
}

// Explicit instantiations.
template Tensor<float> partition_tokens(const Tensor<float>&, const BlockGrid&, int);
template Tensor<double> partition_tokens(const Tensor<double>&, const BlockGrid&, int);
template Tensor<float> partition_tokens_adjoint(const Tensor<float>&, const BlockGrid&, int,
                                                Shape4);
template Tensor<double> partition_tokens_adjoint(const Tensor<double>&, const BlockGrid&, int,
                                                 Shape4);
template Tensor<float> merge_tokens(const Tensor<float>&, const BlockGrid&, int, int, int);
template Tensor<double> merge_tokens(const Tensor<double>&, const BlockGrid&, int, int, int);
template Tensor<float> merge_tokens_adjoint(const Tensor<float>&, const BlockGrid&, int);
template Tensor<double> merge_tokens_adjoint(const Tensor<double>&, const BlockGrid&, int);
template struct AttentionCore<float>;
template struct AttentionCore<double>;
template class ESAM<float>;
template class ESAM<double>;

}  // namespace ssiu::nn
