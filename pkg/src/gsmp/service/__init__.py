"""HTTP service layer: FastAPI app plus request/response schemas."""
