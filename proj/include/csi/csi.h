#ifndef CSI_CSI_H
#define CSI_CSI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CSI_API __declspec(dllexport)
#else
#define CSI_API __attribute__((visibility("default")))
#endif

typedef enum csi_status {
  CSI_OK = 0,
  CSI_ERR_INVALID_ARGUMENT = 1,
  CSI_ERR_IO = 2,
  CSI_ERR_CORRUPT = 3,
  CSI_ERR_UNSUPPORTED_VERSION = 4,
  CSI_ERR_QUERY = 5,
  CSI_ERR_NOT_FOUND = 6,
  CSI_ERR_INTERNAL = 7
} csi_status;

typedef struct csi_store csi_store;
typedef struct csi_server csi_server;

/* Message for the last failed call on this thread; never NULL. */
CSI_API const char* csi_last_error(void);
CSI_API void csi_string_free(char* s);

/* Opens the snapshot at path. A path that does not exist yet gives an empty
   store that csi_store_save creates. */
CSI_API csi_status csi_store_open(const char* path, csi_store** out);
CSI_API void csi_store_close(csi_store* store);

/* format is "xml" or "jsonl". Without append the store is cleared first.
   report_json receives {"records", "issues": [...]} and is freed with
   csi_string_free; it may be NULL. */
CSI_API csi_status csi_store_ingest_file(csi_store* store, const char* input_path,
                                         const char* format, int append, char** report_json);
/* Writes to path, or to the path the store was opened from when NULL. */
CSI_API csi_status csi_store_save(csi_store* store, const char* path);
CSI_API csi_status csi_store_stats_json(csi_store* store, char** out);

/* Runs a read route in process, e.g. endpoint "venues/top-k" with
   query "k=5&metric=papers". out receives the response body (JSON, or CSV
   for export.csv) and http_status its status; on a domain error the body is
   the error object and the call still returns CSI_OK. */
CSI_API csi_status csi_query(csi_store* store, const char* endpoint, const char* query,
                             int* http_status, char** out);

/* data_dir holds the job registry and trained models; NULL keeps them in
   memory. */
CSI_API csi_status csi_server_create(csi_store* store, const char* data_dir, size_t workers,
                                     csi_server** out);
/* listen is "host:port"; port 0 picks a free port, see csi_server_port. */
CSI_API csi_status csi_server_bind(csi_server* server, const char* listen);
CSI_API int csi_server_port(const csi_server* server);
/* Serves on a background thread. */
CSI_API csi_status csi_server_start(csi_server* server);
/* Serves on the calling thread until csi_server_stop. */
CSI_API csi_status csi_server_run(csi_server* server);
CSI_API void csi_server_stop(csi_server* server);
CSI_API void csi_server_destroy(csi_server* server);

#ifdef __cplusplus
}
#endif

#endif
