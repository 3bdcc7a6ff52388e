use serde_json::{json, Value};

fn error_response(description: &str) -> Value {
    json!({
        "description": description,
        "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Error" } } }
    })
}

fn json_body(schema: &str) -> Value {
    json!({
        "required": true,
        "content": { "application/json": { "schema": { "$ref": format!("#/components/schemas/{schema}") } } }
    })
}

fn ok_json(description: &str, schema: &str) -> Value {
    json!({
        "description": description,
        "content": { "application/json": { "schema": { "$ref": format!("#/components/schemas/{schema}") } } }
    })
}

pub fn document() -> Value {
    let angle = json!({
        "oneOf": [
            { "type": "number", "description": "radians" },
            { "type": "string", "example": "30deg" }
        ]
    });
    let device = json!({
        "oneOf": [
            { "type": "string", "example": "nexus6" },
            { "type": "object", "description": "inline device profile" }
        ]
    });
    let session_id =
        json!([{ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } }]);
    json!({
        "openapi": "3.0.3",
        "info": { "title": "illusionpad", "version": env!("CARGO_PKG_VERSION") },
        "paths": {
            "/hybrid": { "post": {
                "summary": "Generate a hybrid keypad bundle",
                "requestBody": json_body("HybridRequest"),
                "responses": {
                    "200": {
                        "description": "bundle, or the hybrid PNG when Accept: image/png",
                        "content": {
                            "application/json": { "schema": { "$ref": "#/components/schemas/HybridResponse" } },
                            "image/png": { "schema": { "type": "string", "format": "binary" } }
                        }
                    },
                    "400": error_response("malformed request or unknown device"),
                    "422": error_response("parameters outside their domain")
                }
            }},
            "/simulate": { "post": {
                "summary": "Simulate perception from a viewing position",
                "requestBody": json_body("SimulateRequest"),
                "responses": {
                    "200": {
                        "description": "perceived image, conditions and verdict",
                        "content": {
                            "application/json": { "schema": { "$ref": "#/components/schemas/SimulateResponse" } },
                            "image/png": { "schema": { "type": "string", "format": "binary" } }
                        }
                    },
                    "400": error_response("malformed request"),
                    "422": error_response("parameters outside their domain")
                }
            }},
            "/session": { "post": {
                "summary": "Start a demo PIN session",
                "requestBody": json_body("SessionRequest"),
                "responses": {
                    "201": ok_json("session created", "SessionView"),
                    "400": error_response("invalid PIN or device")
                }
            }},
            "/session/{id}/press": { "post": {
                "summary": "Press a button by position",
                "parameters": session_id,
                "requestBody": json_body("PressRequest"),
                "responses": {
                    "200": ok_json("session state", "SessionView"),
                    "400": error_response("invalid button"),
                    "404": error_response("unknown or expired session"),
                    "423": error_response("session locked")
                }
            }},
            "/session/{id}/submit": { "post": {
                "summary": "Submit the entered digits",
                "parameters": session_id,
                "responses": {
                    "200": ok_json("attempt outcome", "SubmitOutcome"),
                    "404": error_response("unknown or expired session"),
                    "423": error_response("session locked")
                }
            }},
            "/spec": { "get": {
                "summary": "This document",
                "responses": { "200": { "description": "OpenAPI document" } }
            }}
        },
        "components": { "schemas": {
            "Error": {
                "type": "object",
                "required": ["error"],
                "properties": {
                    "error": { "type": "string" },
                    "profiles": { "type": "array", "items": { "type": "string" } }
                }
            },
            "Category": { "type": "string", "enum": ["c1", "c2", "c3", "c4"] },
            "HybridRequest": {
                "type": "object",
                "properties": {
                    "device": device,
                    "category": { "$ref": "#/components/schemas/Category" },
                    "sigma_lf": { "type": "number" },
                    "sigma_hf": { "type": "number" },
                    "seed": { "type": "integer", "minimum": 0 },
                    "resolution": { "type": "array", "items": { "type": "integer" }, "minItems": 2, "maxItems": 2 }
                }
            },
            "Position": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["r", "theta", "phi"],
                        "properties": { "r": { "type": "number" }, "theta": angle, "phi": angle }
                    },
                    {
                        "type": "object",
                        "required": ["x", "y", "z"],
                        "properties": { "x": { "type": "number" }, "y": { "type": "number" }, "z": { "type": "number" } }
                    }
                ]
            },
            "SimulateRequest": {
                "type": "object",
                "required": ["position"],
                "properties": {
                    "keypad": { "$ref": "#/components/schemas/HybridRequest" },
                    "png": { "type": "string", "format": "byte" },
                    "device": device,
                    "position": { "$ref": "#/components/schemas/Position" },
                    "v_th": { "type": "number" }
                }
            },
            "HybridResponse": {
                "type": "object",
                "properties": {
                    "schema_version": { "type": "integer" },
                    "metadata": { "type": "object" },
                    "layout": { "type": "object" },
                    "images": {
                        "type": "object",
                        "properties": {
                            "hybrid": { "type": "string", "format": "byte" },
                            "user_high": { "type": "string", "format": "byte" },
                            "surfer_low": { "type": "string", "format": "byte" }
                        }
                    }
                }
            },
            "SimulateResponse": {
                "type": "object",
                "properties": {
                    "schema_version": { "type": "integer" },
                    "perceived": { "type": "string", "format": "byte" },
                    "conditions": {
                        "type": "object",
                        "properties": {
                            "f1": { "type": "number" },
                            "visual_angle_deg": { "type": "array", "items": { "type": "number" } },
                            "extrapolated_angles": { "type": "boolean" }
                        }
                    },
                    "verdict": {
                        "type": "object",
                        "properties": {
                            "v": { "type": "number" },
                            "v_th": { "type": "number" },
                            "visible": { "type": "boolean" }
                        }
                    }
                }
            },
            "SessionRequest": {
                "type": "object",
                "required": ["pin"],
                "properties": {
                    "device": device,
                    "category": { "$ref": "#/components/schemas/Category" },
                    "pin": { "type": "string", "pattern": "^[0-9]{4,8}$" },
                    "shuffle_mode": { "type": "string", "enum": ["per_attempt", "per_digit"] },
                    "seed": { "type": "integer", "minimum": 0 }
                }
            },
            "PressRequest": {
                "type": "object",
                "required": ["button"],
                "properties": { "button": { "type": "integer", "minimum": 0, "maximum": 9 } }
            },
            "SessionView": {
                "type": "object",
                "properties": {
                    "session_id": { "type": "string" },
                    "device": { "type": "string" },
                    "category": { "$ref": "#/components/schemas/Category" },
                    "attempts": { "type": "integer" },
                    "failures": { "type": "integer" },
                    "attempts_left": { "type": "integer" },
                    "locked": { "type": "boolean" },
                    "pressed": { "type": "integer" },
                    "expires_in_s": { "type": "integer" },
                    "keypad": {
                        "type": "object",
                        "properties": {
                            "image": { "type": "string", "format": "byte" },
                            "width": { "type": "integer" },
                            "height": { "type": "integer" },
                            "buttons": { "type": "array", "items": { "type": "object" } }
                        }
                    }
                }
            },
            "SubmitOutcome": {
                "allOf": [
                    { "$ref": "#/components/schemas/SessionView" },
                    { "type": "object", "properties": { "accepted": { "type": "boolean" } } }
                ]
            }
        }}
    })
}
