// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/mui_cache.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "groundcheck/error.hpp"
#include "groundcheck/rng.hpp"

namespace groundcheck {

std::string_view to_string(PageTag tag) {
    switch (tag) {
        case PageTag::BasePrompt: return "base";
        case PageTag::CitationInstr: return "citation";
        case PageTag::Decode: return "decode";
    }
    return "decode";
}

std::uint64_t chain_digest(std::uint64_t previous, std::uint32_t token_id, std::uint64_t position) noexcept {
    return splitmix64(previous ^ splitmix64((static_cast<std::uint64_t>(token_id) << 32) ^ position));
}

// ---------------------------------------------------------------------------
// PageAllocator

PageAllocator::PageAllocator(std::size_t page_size, std::size_t budget_pages)
    : page_size_(page_size), budget_pages_(budget_pages) {
    if (page_size_ == 0) throw_validation("page size must be >= 1");
}

PageId PageAllocator::allocate(PageTag tag) {
    std::lock_guard lock(mutex_);
    if (budget_pages_ != 0 && pages_.size() >= budget_pages_) {
        throw Error(ErrorKind::Capacity, fmt::format("page budget exhausted ({} pages)", budget_pages_));
    }
    auto page = std::make_unique<Page>();
    page->id = next_id_++;
    page->capacity = page_size_;
    page->entries.reserve(page_size_);
    page->refcount = 1;
    page->tag = tag;
    PageId id = page->id;
    pages_.emplace(id, std::move(page));
    ++total_allocations_;
    peak_refcount_ = std::max(peak_refcount_, 1);
    return id;
}

Page& PageAllocator::mutable_page(PageId id) {
    auto it = pages_.find(id);
    if (it == pages_.end()) throw_validation(fmt::format("page {} is not allocated", id));
    return *it->second;
}

void PageAllocator::retain(PageId id) {
    std::lock_guard lock(mutex_);
    Page& p = mutable_page(id);
    ++p.refcount;
    peak_refcount_ = std::max(peak_refcount_, p.refcount);
}

void PageAllocator::release(PageId id) {
    std::lock_guard lock(mutex_);
    Page& p = mutable_page(id);
    if (--p.refcount == 0) pages_.erase(id);
}

void PageAllocator::append(PageId id, const KvEntry& entry) {
    std::lock_guard lock(mutex_);
    Page& p = mutable_page(id);
    if (p.sealed) throw_validation(fmt::format("page {} is sealed", id));
    if (p.entries.size() >= p.capacity) throw_validation(fmt::format("page {} is full", id));
    p.entries.push_back(entry);
    ++entries_created_;
}

void PageAllocator::seal(PageId id) {
    std::lock_guard lock(mutex_);
    mutable_page(id).sealed = true;
}

const Page& PageAllocator::page(PageId id) const {
    std::lock_guard lock(mutex_);
    auto it = pages_.find(id);
    if (it == pages_.end()) throw_validation(fmt::format("page {} is not allocated", id));
    return *it->second;
}

std::size_t PageAllocator::live_pages() const {
    std::lock_guard lock(mutex_);
    return pages_.size();
}

std::size_t PageAllocator::leaked_pages() const {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(
        std::count_if(pages_.begin(), pages_.end(), [](const auto& kv) { return kv.second->refcount <= 0; }));
}

std::size_t PageAllocator::total_allocations() const {
    std::lock_guard lock(mutex_);
    return total_allocations_;
}

std::uint64_t PageAllocator::entries_created() const {
    std::lock_guard lock(mutex_);
    return entries_created_;
}

int PageAllocator::peak_refcount() const {
    std::lock_guard lock(mutex_);
    return peak_refcount_;
}

void PageAllocator::reset_peak() {
    std::lock_guard lock(mutex_);
    peak_refcount_ = 0;
    for (const auto& [id, page] : pages_) peak_refcount_ = std::max(peak_refcount_, page->refcount);
}

void PageLease::release_all() noexcept {
    for (auto it = held_.rbegin(); it != held_.rend(); ++it) {
        try {
            allocator_->release(*it);
        } catch (...) {
        }
    }
    held_.clear();
}

// ---------------------------------------------------------------------------
// Variants, model, stats

UxVariant UxVariant::parse(std::string_view spec) {
    UxVariant ux;
    auto colon = spec.find(':');
    ux.name = std::string(spec.substr(0, colon));
    if (colon != std::string_view::npos) {
        auto flag = spec.substr(colon + 1);
        if (flag != "cite") throw_validation(fmt::format("bad UX spec '{}': expected name or name:cite", spec));
        ux.needs_citation = true;
    }
    if (ux.name.empty()) throw_validation(fmt::format("bad UX spec '{}': empty name", spec));
    return ux;
}

void validate_ux_family(const std::vector<UxVariant>& variants) {
    if (variants.empty()) throw_validation("at least one UX variant is required");
    std::set<std::string> names;
    int citing = 0;
    for (const UxVariant& ux : variants) {
        if (!names.insert(ux.name).second) throw_validation(fmt::format("duplicate UX variant '{}'", ux.name));
        citing += ux.needs_citation ? 1 : 0;
    }
    if (citing > 1) throw_validation("at most one UX variant may need citations");
}

PageTable PrefillResult::table() const {
    PageTable t;
    t.pages = base_pages;
    t.pages.insert(t.pages.end(), citation_pages.begin(), citation_pages.end());
    return t;
}

std::uint64_t MockModel::initial_state() const noexcept { return splitmix64(seed); }

std::uint64_t MockModel::absorb(std::uint64_t state, const KvEntry& entry) const noexcept {
    return splitmix64(state ^ entry.digest ^ splitmix64((static_cast<std::uint64_t>(entry.token_id) << 32) ^ entry.position));
}

std::uint32_t MockModel::next_token(std::uint64_t state) const noexcept {
    return static_cast<std::uint32_t>(splitmix64(state ^ seed) & 0x7FFFFFFFu);
}

CacheStats& CacheStats::operator+=(const CacheStats& o) {
    prefill_tokens_shared += o.prefill_tokens_shared;
    prefill_tokens_naive += o.prefill_tokens_naive;
    pages_allocated += o.pages_allocated;
    pages_naive += o.pages_naive;
    peak_refcount = std::max(peak_refcount, o.peak_refcount);
    kv_entries_created += o.kv_entries_created;
    decode_tokens += o.decode_tokens;
    requests += o.requests;
    failed_requests += o.failed_requests;
    return *this;
}

// ---------------------------------------------------------------------------
// MuiSimulator

MuiSimulator::MuiSimulator(MuiConfig config)
    : config_(config), allocator_(config.page_size, config.budget_pages) {
    if (config_.max_concurrent_streams == 0) throw_validation("max concurrent streams must be >= 1");
}

PrefillResult MuiSimulator::prefill(const AssembledPrompt& prompt) {
    for (std::size_t i = 0; i < prompt.segments.size(); ++i) {
        if (prompt.segments[i].kind == SegmentKind::CitationInstr && i + 1 != prompt.segments.size()) {
            throw_validation("citation instructions must be the last prompt segment");
        }
    }

    PrefillResult result;
    PageLease lease(allocator_);
    std::uint64_t position = 0;
    std::uint64_t digest = 0;

    auto fill = [&](const std::vector<std::uint32_t>& tokens, PageTag tag, std::vector<PageId>& pages) {
        std::size_t used = config_.page_size;
        for (std::uint32_t token : tokens) {
            if (used == config_.page_size) {
                PageId id = allocator_.allocate(tag);
                lease.adopt(id);
                pages.push_back(id);
                used = 0;
            }
            digest = chain_digest(digest, token, position);
            allocator_.append(pages.back(), KvEntry{token, position, digest});
            ++position;
            ++used;
        }
    };

    std::vector<std::uint32_t> base, citation;
    for (const PromptSegment& s : prompt.segments) {
        auto& dst = s.kind == SegmentKind::CitationInstr ? citation : base;
        dst.insert(dst.end(), s.token_ids.begin(), s.token_ids.end());
    }
    // Separate fills force a page boundary at the base/citation seam.
    fill(base, PageTag::BasePrompt, result.base_pages);
    fill(citation, PageTag::CitationInstr, result.citation_pages);
    for (PageId id : result.base_pages) allocator_.seal(id);
    for (PageId id : result.citation_pages) allocator_.seal(id);
    result.base_tokens = base.size();
    result.citation_tokens = citation.size();

    // References now belong to the caller.
    lease.dismiss();
    return result;
}

std::vector<KvEntry> MuiSimulator::decode_view(const PageTable& table, const UxVariant& ux) const {
    std::vector<KvEntry> view;
    for (PageId id : table.pages) {
        const Page& page = allocator_.page(id);
        if (page.tag == PageTag::Decode) throw_validation("decode pages cannot appear in a prompt page table");
        if (page.tag == PageTag::CitationInstr && !ux.needs_citation) continue;
        view.insert(view.end(), page.entries.begin(), page.entries.end());
    }
    for (std::size_t i = 0; i < view.size(); ++i) {
        if (view[i].position != i) {
            throw_validation(fmt::format("view for UX '{}' is not contiguous: slot {} holds position {}", ux.name, i,
                                         view[i].position));
        }
    }
    return view;
}

DecodeStream MuiSimulator::decode(const std::vector<KvEntry>& view, std::size_t max_steps) {
    DecodeStream stream;
    PageLease lease(allocator_);
    const MockModel& model = config_.model;
    std::uint64_t state = model.initial_state();
    for (const KvEntry& e : view) state = model.absorb(state, e);
    std::uint64_t position = view.empty() ? 0 : view.back().position + 1;
    std::uint64_t digest = view.empty() ? 0 : view.back().digest;

    std::size_t used = config_.page_size;
    for (std::size_t step = 0; step < max_steps; ++step) {
        std::uint32_t token = model.next_token(state);
        digest = chain_digest(digest, token, position);
        KvEntry entry{token, position, digest};
        if (used == config_.page_size) {
            PageId id = allocator_.allocate(PageTag::Decode);
            lease.adopt(id);
            stream.pages.push_back(id);
            used = 0;
        }
        allocator_.append(stream.pages.back(), entry);
        ++used;
        ++position;
        state = model.absorb(state, entry);
        stream.tokens.push_back(token);
    }
    lease.dismiss();
    return stream;
}

MultiUxResult MuiSimulator::run_multi_ux(const QueryRecord& request, const std::vector<UxVariant>& variants,
                                         const TemplateSet& templates) {
    validate_ux_family(variants);
    const bool any_citation =
        std::any_of(variants.begin(), variants.end(), [](const UxVariant& ux) { return ux.needs_citation; });
    AssembledPrompt prompt = assemble(any_citation ? Variant::Citation : Variant::Guided, request, templates);

    allocator_.reset_peak();
    const std::size_t allocations_before = allocator_.total_allocations();
    const std::uint64_t entries_before = allocator_.entries_created();
    PageLease lease(allocator_);

    PrefillResult prefilled = prefill(prompt);
    for (PageId id : prefilled.base_pages) lease.adopt(id);
    for (PageId id : prefilled.citation_pages) lease.adopt(id);
    const std::uint64_t prefill_entries = allocator_.entries_created() - entries_before;
    const PageTable table = prefilled.table();

    // Every stream holds its own reference to the prompt pages it can see.
    for (const UxVariant& ux : variants) {
        for (PageId id : prefilled.base_pages) {
            allocator_.retain(id);
            lease.adopt(id);
        }
        if (!ux.needs_citation) continue;
        for (PageId id : prefilled.citation_pages) {
            allocator_.retain(id);
            lease.adopt(id);
        }
    }

    std::vector<DecodeStream> streams(variants.size());
    std::vector<std::exception_ptr> errors(variants.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < variants.size(); i = next.fetch_add(1)) {
            try {
                streams[i] = decode(decode_view(table, variants[i]), config_.max_decode_steps);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(config_.max_concurrent_streams, variants.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (DecodeStream& s : streams) {
        for (PageId id : s.pages) lease.adopt(id);
    }
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);  // lease releases everything on the way out
    }

    MultiUxResult result;
    CacheStats& stats = result.stats;
    const std::uint64_t B = prefilled.base_tokens;
    const std::uint64_t C = prefilled.citation_tokens;
    const std::uint64_t P = config_.page_size;
    stats.prefill_tokens_shared = B + C;
    stats.kv_entries_created = prefill_entries;
    std::uint64_t decode_pages = 0;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const std::uint64_t suffix = variants[i].needs_citation ? C : 0;
        stats.prefill_tokens_naive += B + suffix;
        stats.pages_naive += (B + suffix + P - 1) / P;
        decode_pages += streams[i].pages.size();
        stats.decode_tokens += streams[i].tokens.size();
        result.outputs[variants[i].name] = std::move(streams[i].tokens);
    }
    stats.pages_naive += decode_pages;
    stats.pages_allocated = allocator_.total_allocations() - allocations_before;
    stats.peak_refcount = static_cast<std::uint64_t>(allocator_.peak_refcount());
    stats.requests = 1;
    return result;
}

std::vector<std::uint32_t> decode_standalone(const AssembledPrompt& prompt, const MuiConfig& config) {
    MuiConfig own = config;
    own.budget_pages = 0;
    MuiSimulator sim(own);
    PrefillResult prefilled = sim.prefill(prompt);
    PageLease lease(sim.allocator());
    for (PageId id : prefilled.base_pages) lease.adopt(id);
    for (PageId id : prefilled.citation_pages) lease.adopt(id);
    DecodeStream stream = sim.decode(sim.decode_view(prefilled.table(), UxVariant{"standalone", true}),
                                     config.max_decode_steps);
    for (PageId id : stream.pages) lease.adopt(id);
    return stream.tokens;
}

}  // namespace groundcheck
