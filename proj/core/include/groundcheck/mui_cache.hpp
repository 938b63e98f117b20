// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "groundcheck/model.hpp"
#include "groundcheck/prompt.hpp"

namespace groundcheck {

enum class PageTag { BasePrompt, CitationInstr, Decode };
std::string_view to_string(PageTag tag);

using PageId = std::int64_t;

/// Stand-in for one token's key/value state. The digest chains the token,
/// its position and every earlier digest, so any divergence in the visible
/// history shows up in all later digests.
struct KvEntry {
    std::uint32_t token_id = 0;
    std::uint64_t position = 0;
    std::uint64_t digest = 0;

    friend bool operator==(const KvEntry&, const KvEntry&) = default;
};

std::uint64_t chain_digest(std::uint64_t previous, std::uint32_t token_id, std::uint64_t position) noexcept;

struct Page {
    PageId id = 0;
    std::size_t capacity = 0;
    std::vector<KvEntry> entries;
    int refcount = 0;
    PageTag tag = PageTag::Decode;
    bool sealed = false;
};

/// Fixed-size pages with reference counts and an optional budget on live
/// pages. Every mutation goes through one mutex. Sealed pages never change,
/// so holders of a reference may read their entries without locking.
class PageAllocator {
public:
    /// `budget_pages == 0` means unlimited.
    PageAllocator(std::size_t page_size, std::size_t budget_pages);
    PageAllocator(const PageAllocator&) = delete;
    PageAllocator& operator=(const PageAllocator&) = delete;

    /// New page with refcount 1. Throws a Capacity error when over budget.
    PageId allocate(PageTag tag);
    void retain(PageId id);
    /// Frees the page when its refcount reaches zero.
    void release(PageId id);
    void append(PageId id, const KvEntry& entry);
    void seal(PageId id);

    const Page& page(PageId id) const;
    std::size_t page_size() const noexcept { return page_size_; }
    std::size_t budget_pages() const noexcept { return budget_pages_; }
    std::size_t live_pages() const;
    /// Live pages whose refcount is zero; always 0 unless bookkeeping is broken.
    std::size_t leaked_pages() const;
    std::size_t total_allocations() const;
    std::uint64_t entries_created() const;
    int peak_refcount() const;
    void reset_peak();

private:
    Page& mutable_page(PageId id);

    std::size_t page_size_;
    std::size_t budget_pages_;
    mutable std::mutex mutex_;
    std::unordered_map<PageId, std::unique_ptr<Page>> pages_;
    PageId next_id_ = 1;
    std::size_t total_allocations_ = 0;
    std::uint64_t entries_created_ = 0;
    int peak_refcount_ = 0;
};

/// Releases every page it holds on destruction.
class PageLease {
public:
    explicit PageLease(PageAllocator& allocator) : allocator_(&allocator) {}
    PageLease(const PageLease&) = delete;
    PageLease& operator=(const PageLease&) = delete;
    ~PageLease() { release_all(); }

    /// Takes over one reference to `id`.
    void adopt(PageId id) { held_.push_back(id); }
    void release_all() noexcept;
    /// Hands every held reference to the caller without releasing it.
    void dismiss() noexcept { held_.clear(); }

private:
    PageAllocator* allocator_;
    std::vector<PageId> held_;
};

struct UxVariant {
    std::string name;
    bool needs_citation = false;

    /// "name" or "name:cite".
    static UxVariant parse(std::string_view spec);
    friend bool operator==(const UxVariant&, const UxVariant&) = default;
};

/// Ordered page ids of one request's prompt (base pages, then citation pages).
struct PageTable {
    std::vector<PageId> pages;
};

struct PrefillResult {
    std::vector<PageId> base_pages;
    std::vector<PageId> citation_pages;
    std::size_t base_tokens = 0;
    std::size_t citation_tokens = 0;

    PageTable table() const;
};

/// Deterministic next-token function over the visible KV history.
struct MockModel {
    std::uint64_t seed = 0x5EEDu;

    /// Folds every visible entry (token, position, digest) into a state.
    std::uint64_t absorb(std::uint64_t state, const KvEntry& entry) const noexcept;
    std::uint64_t initial_state() const noexcept;
    std::uint32_t next_token(std::uint64_t state) const noexcept;
};

struct CacheStats {
    std::uint64_t prefill_tokens_shared = 0;
    std::uint64_t prefill_tokens_naive = 0;
    std::uint64_t pages_allocated = 0;
    std::uint64_t pages_naive = 0;
    std::uint64_t peak_refcount = 0;
    std::uint64_t kv_entries_created = 0;
    std::uint64_t decode_tokens = 0;
    std::uint64_t requests = 0;
    std::uint64_t failed_requests = 0;

    std::uint64_t prefill_savings() const noexcept { return prefill_tokens_naive - prefill_tokens_shared; }
    CacheStats& operator+=(const CacheStats& other);
};

struct MuiConfig {
    std::size_t page_size = 16;
    std::size_t budget_pages = 0;
    std::size_t max_concurrent_streams = 4;
    std::size_t max_decode_steps = 16;
    MockModel model;
};

struct DecodeStream {
    std::vector<std::uint32_t> tokens;
    std::vector<PageId> pages;
};

struct MultiUxResult {
    std::map<std::string, std::vector<std::uint32_t>> outputs;
    CacheStats stats;
};

/// Multi-UX inference over a shared paged prompt cache.
///
/// The prompt is prefilled once. Base-prompt tokens and citation-instruction
/// tokens land on separate pages (the last base page may be partly empty), so
/// a UX that does not need citations decodes against the base pages only.
/// Because the citation instructions sit at the end of the prompt, dropping
/// their pages leaves positions 0..B-1 contiguous.
class MuiSimulator {
public:
    explicit MuiSimulator(MuiConfig config);

    /// Pages the prompt. The caller owns one reference to every returned page.
    /// Throws Validation unless the citation segment (if any) is last.
    PrefillResult prefill(const AssembledPrompt& prompt);

    /// Visible history for `ux`: all prompt pages, or all but citation pages.
    /// Throws if the visible positions are not exactly 0, 1, 2, ...
    std::vector<KvEntry> decode_view(const PageTable& table, const UxVariant& ux) const;

    /// Generates up to `max_steps` tokens onto fresh Decode pages owned by the
    /// returned stream (the caller releases them).
    DecodeStream decode(const std::vector<KvEntry>& view, std::size_t max_steps);

    /// One request: single prefill, FIFO decode streams with at most
    /// max_concurrent_streams running. On failure every page taken by the
    /// request is released before the error propagates.
    MultiUxResult run_multi_ux(const QueryRecord& request, const std::vector<UxVariant>& variants,
                               const TemplateSet& templates);

    PageAllocator& allocator() noexcept { return allocator_; }
    const PageAllocator& allocator() const noexcept { return allocator_; }
    const MuiConfig& config() const noexcept { return config_; }

private:
    MuiConfig config_;
    PageAllocator allocator_;
};

/// Decodes `prompt` on a private simulator with the whole prompt visible.
std::vector<std::uint32_t> decode_standalone(const AssembledPrompt& prompt, const MuiConfig& config);

void validate_ux_family(const std::vector<UxVariant>& variants);

}  // namespace groundcheck
